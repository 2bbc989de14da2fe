#ifndef PHENOMAP_ONTOLOGY_HPP
#define PHENOMAP_ONTOLOGY_HPP

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phenomap/error.hpp"

namespace phenomap {

/// A term as it appears in the source file, before validation.
struct Term {
    std::string id;
    std::string name;
    std::vector<std::string> parents;  // is_a targets, file order
};

/**
 * Immutable is_a hierarchy. Terms are stored densely in file order; parent
 * edges point towards the more general term. Construction validates that
 * ids are unique, every parent exists and the parent relation is acyclic.
 */
class OntologyGraph {
public:
    OntologyGraph() = default;

    /// Validates and indexes `terms`. Throws InputError on duplicate ids,
    /// dangling parents (all of them listed) or a cycle.
    static OntologyGraph from_terms(std::vector<Term> terms);

    std::size_t size() const { return ids_.size(); }
    bool contains(std::string_view id) const { return index_of(id).has_value(); }
    std::optional<std::size_t> index_of(std::string_view id) const;

    /// Index lookup that throws InputError for unknown ids.
    std::size_t require(std::string_view id) const;

    const std::string& id(std::size_t index) const { return ids_.at(index); }
    const std::string& name(std::size_t index) const { return names_.at(index); }
    const std::vector<std::size_t>& parents(std::size_t index) const { return parents_.at(index); }

    /// Name if present, otherwise the id.
    const std::string& display_name(std::size_t index) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::string> names_;
    std::vector<std::vector<std::size_t>> parents_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Parses the `[Term]` stanzas of an OBO document (id, name, is_a,
/// is_obsolete). Obsolete terms are dropped, so edges into them dangle.
OntologyGraph parse_obo(std::string_view text);

/// Strict ancestors of `id` (the term itself excluded). Throws on unknown id.
std::set<std::string> ancestors(const OntologyGraph& graph, std::string_view id);

/// Hop distance from `index` to every reachable ancestor, itself at 0.
/// Unreachable terms are reported as std::nullopt.
std::vector<std::optional<std::size_t>> ancestor_distances(const OntologyGraph& graph,
                                                           std::size_t index);

struct Category {
    std::string id;
    std::string label;
};

/// Ordered set of category terms; the order breaks subsumption ties.
class CategorySet {
public:
    CategorySet() = default;

    /// Throws InputError on an unknown or duplicated id.
    CategorySet(const OntologyGraph& graph, std::vector<Category> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const Category& operator[](std::size_t i) const { return entries_.at(i); }
    const std::vector<Category>& entries() const { return entries_; }

    /// Position in file order, or nullopt for a non-category term.
    std::optional<std::size_t> position_of_term(std::size_t term_index) const;

    std::vector<std::string> labels() const;

private:
    std::vector<Category> entries_;
    std::unordered_map<std::size_t, std::size_t> by_term_;
};

/// Reads a category file: one term id per line, optionally followed by a TAB
/// and a display label (the term name is used otherwise). Blank lines and
/// lines starting with `#` are skipped. Nested categories produce a warning.
CategorySet parse_categories(std::string_view text, const OntologyGraph& graph,
                             Warnings* warnings = nullptr);

/// Nearest category at or above `term` by is_a hop count; ties go to the
/// category listed first. Throws InputError for an unknown term.
std::optional<std::string> subsume(const OntologyGraph& graph, const CategorySet& categories,
                                   std::string_view term);

/// Position-returning variant of `subsume` used by the matrix builder.
std::optional<std::size_t> subsume_position(const OntologyGraph& graph,
                                            const CategorySet& categories,
                                            std::size_t term_index);

struct Reduction {
    std::vector<std::string> categories;  // CategorySet order, no duplicates
    std::vector<std::size_t> positions;   // matching CategorySet positions
    std::size_t dropped = 0;              // known terms with no category above them
    std::size_t unknown = 0;              // terms missing from the ontology
    std::vector<std::string> unknown_terms;
};

/// Union of `subsume` over `terms`. Unknown terms are counted and skipped,
/// or raise InputError when `strict` is set.
Reduction reduce_terms(const OntologyGraph& graph, const CategorySet& categories,
                       const std::vector<std::string>& terms, bool strict = false);

}  // namespace phenomap

#endif
