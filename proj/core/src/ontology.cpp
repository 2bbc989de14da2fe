#include "phenomap/ontology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_set>

namespace phenomap {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (end == text.size()) break;
        start = end + 1;
    }
    return lines;
}

// is_a values look like "HP:0000001 ! comment" or "HP:0000001 {qualifier}".
std::string_view is_a_target(std::string_view value) {
    if (auto bang = value.find('!'); bang != std::string_view::npos) value = value.substr(0, bang);
    value = trim(value);
    if (auto ws = value.find_first_of(" \t{"); ws != std::string_view::npos) value = value.substr(0, ws);
    return value;
}

}  // namespace

OntologyGraph OntologyGraph::from_terms(std::vector<Term> terms) {
    OntologyGraph graph;
    graph.ids_.reserve(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        auto [it, inserted] = graph.index_.emplace(terms[i].id, i);
        if (!inserted) throw InputError("duplicate term id: " + terms[i].id);
        graph.ids_.push_back(terms[i].id);
        graph.names_.push_back(std::move(terms[i].name));
    }

    std::vector<std::string> dangling;
    std::unordered_set<std::string> dangling_seen;
    graph.parents_.resize(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        auto& out = graph.parents_[i];
        for (const auto& parent : terms[i].parents) {
            auto found = graph.index_.find(parent);
            if (found == graph.index_.end()) {
                if (dangling_seen.insert(parent).second) dangling.push_back(parent);
                continue;
            }
            if (std::find(out.begin(), out.end(), found->second) == out.end()) {
                out.push_back(found->second);
            }
        }
    }
    if (!dangling.empty()) {
        std::string msg = "is_a targets not defined as live terms:";
        for (const auto& id : dangling) msg += " " + id;
        throw InputError(msg);
    }

    // Iterative three-colour DFS.
    enum : char { kWhite, kGrey, kBlack };
    std::vector<char> colour(graph.size(), kWhite);
    for (std::size_t root = 0; root < graph.size(); ++root) {
        if (colour[root] != kWhite) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        colour[root] = kGrey;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            const auto& ps = graph.parents_[node];
            if (next < ps.size()) {
                const std::size_t p = ps[next++];
                if (colour[p] == kGrey) {
                    throw InputError("is_a cycle through term " + graph.ids_[p]);
                }
                if (colour[p] == kWhite) {
                    colour[p] = kGrey;
                    stack.emplace_back(p, 0);
                }
            } else {
                colour[node] = kBlack;
                stack.pop_back();
            }
        }
    }
    return graph;
}

std::optional<std::size_t> OntologyGraph::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t OntologyGraph::require(std::string_view id) const {
    auto index = index_of(id);
    if (!index) throw InputError("unknown term id: " + std::string(id));
    return *index;
}

const std::string& OntologyGraph::display_name(std::size_t index) const {
    const auto& n = names_.at(index);
    return n.empty() ? ids_.at(index) : n;
}

OntologyGraph parse_obo(std::string_view text) {
    struct Stanza {
        Term term;
        std::size_t line = 0;
        bool obsolete = false;
        bool has_id = false;
    };

    std::vector<Stanza> stanzas;
    bool in_term = false;
    const auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const auto line = trim(lines[ln]);
        if (line.empty() || line.front() == '!') continue;
        if (line.front() == '[') {
            in_term = line == "[Term]";
            if (in_term) {
                stanzas.emplace_back();
                stanzas.back().line = ln + 1;
            }
            continue;
        }
        if (!in_term) continue;

        const auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        const auto tag = trim(line.substr(0, colon));
        const auto value = trim(line.substr(colon + 1));
        auto& st = stanzas.back();
        if (tag == "id") {
            if (st.has_id) {
                throw InputError("line " + std::to_string(ln + 1) + ": second id in stanza");
            }
            st.term.id = std::string(is_a_target(value));
            st.has_id = !st.term.id.empty();
        } else if (tag == "name") {
            if (st.term.name.empty()) st.term.name = std::string(value);
        } else if (tag == "is_a") {
            auto target = is_a_target(value);
            if (!target.empty()) st.term.parents.emplace_back(target);
        } else if (tag == "is_obsolete") {
            st.obsolete = value == "true";
        }
    }

    std::unordered_map<std::string, std::size_t> first_line;
    std::vector<Term> live;
    for (auto& st : stanzas) {
        if (!st.has_id) continue;
        auto [it, inserted] = first_line.emplace(st.term.id, st.line);
        if (!inserted) {
            throw InputError("line " + std::to_string(st.line) + ": duplicate term id " +
                             st.term.id + " (first defined on line " +
                             std::to_string(it->second) + ")");
        }
        if (!st.obsolete) live.push_back(std::move(st.term));
    }
    return OntologyGraph::from_terms(std::move(live));
}

std::vector<std::optional<std::size_t>> ancestor_distances(const OntologyGraph& graph,
                                                           std::size_t index) {
    std::vector<std::optional<std::size_t>> dist(graph.size());
    std::deque<std::size_t> queue{index};
    dist.at(index) = 0;
    while (!queue.empty()) {
        const auto node = queue.front();
        queue.pop_front();
        for (auto p : graph.parents(node)) {
            if (!dist[p]) {
                dist[p] = *dist[node] + 1;
                queue.push_back(p);
            }
        }
    }
    return dist;
}

std::set<std::string> ancestors(const OntologyGraph& graph, std::string_view id) {
    const auto index = graph.require(id);
    const auto dist = ancestor_distances(graph, index);
    std::set<std::string> out;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (i != index && dist[i]) out.insert(graph.id(i));
    }
    return out;
}

CategorySet::CategorySet(const OntologyGraph& graph, std::vector<Category> entries)
    : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto term = graph.index_of(entries_[i].id);
        if (!term) throw InputError("category term not in ontology: " + entries_[i].id);
        if (!by_term_.emplace(*term, i).second) {
            throw InputError("duplicate category term: " + entries_[i].id);
        }
        if (entries_[i].label.empty()) entries_[i].label = graph.display_name(*term);
    }
}

std::optional<std::size_t> CategorySet::position_of_term(std::size_t term_index) const {
    auto it = by_term_.find(term_index);
    if (it == by_term_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> CategorySet::labels() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& c : entries_) out.push_back(c.label);
    return out;
}

CategorySet parse_categories(std::string_view text, const OntologyGraph& graph,
                             Warnings* warnings) {
    std::vector<Category> entries;
    std::unordered_set<std::string> seen;
    const auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string_view line = lines[ln];
        if (trim(line).empty() || trim(line).front() == '#') continue;
        Category c;
        if (auto tab = line.find('\t'); tab != std::string_view::npos) {
            c.id = std::string(trim(line.substr(0, tab)));
            c.label = std::string(trim(line.substr(tab + 1)));
        } else {
            c.id = std::string(trim(line));
        }
        const auto where = "line " + std::to_string(ln + 1) + ": ";
        if (!graph.contains(c.id)) throw InputError(where + "category term not in ontology: " + c.id);
        if (!seen.insert(c.id).second) throw InputError(where + "duplicate category term: " + c.id);
        entries.push_back(std::move(c));
    }
    CategorySet set(graph, std::move(entries));

    if (warnings) {
        for (std::size_t i = 0; i < set.size(); ++i) {
            const auto dist = ancestor_distances(graph, graph.require(set[i].id));
            for (std::size_t j = 0; j < set.size(); ++j) {
                if (i != j && dist[graph.require(set[j].id)]) {
                    warnings->push_back("category " + set[j].id + " is an ancestor of category " +
                                        set[i].id + "; the deeper category shadows it");
                }
            }
        }
    }
    return set;
}

std::optional<std::size_t> subsume_position(const OntologyGraph& graph,
                                            const CategorySet& categories,
                                            std::size_t term_index) {
    const auto dist = ancestor_distances(graph, term_index);
    std::optional<std::size_t> best;
    std::size_t best_dist = std::numeric_limits<std::size_t>::max();
    for (std::size_t pos = 0; pos < categories.size(); ++pos) {
        const auto d = dist[graph.require(categories[pos].id)];
        if (d && *d < best_dist) {
            best = pos;
            best_dist = *d;
        }
    }
    return best;
}

std::optional<std::string> subsume(const OntologyGraph& graph, const CategorySet& categories,
                                   std::string_view term) {
    const auto pos = subsume_position(graph, categories, graph.require(term));
    if (!pos) return std::nullopt;
    return categories[*pos].id;
}

Reduction reduce_terms(const OntologyGraph& graph, const CategorySet& categories,
                       const std::vector<std::string>& terms, bool strict) {
    Reduction out;
    std::vector<bool> hit(categories.size(), false);
    for (const auto& t : terms) {
        const auto index = graph.index_of(t);
        if (!index) {
            if (strict) throw InputError("unknown term id: " + t);
            ++out.unknown;
            out.unknown_terms.push_back(t);
            continue;
        }
        const auto pos = subsume_position(graph, categories, *index);
        if (pos) {
            hit[*pos] = true;
        } else {
            ++out.dropped;
        }
    }
    for (std::size_t pos = 0; pos < hit.size(); ++pos) {
        if (hit[pos]) {
            out.positions.push_back(pos);
            out.categories.push_back(categories[pos].id);
        }
    }
    return out;
}

}  // namespace phenomap
