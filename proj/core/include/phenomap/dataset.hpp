#ifndef PHENOMAP_DATASET_HPP
#define PHENOMAP_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phenomap/error.hpp"
#include "phenomap/ontology.hpp"

namespace phenomap {

/// One labelled observation coded as ontology terms.
struct VariantRecord {
    std::string class_label;
    std::string variant_name;
    std::vector<std::string> term_ids;
};

/// Reads `class,variant,terms` CSV; `terms` is a `|`-separated id list.
/// Throws InputError with the offending line number.
std::vector<VariantRecord> load_variants_csv(std::string_view text);

/// Reads an Orphadata-style XML product: one record per `Disorder` element,
/// named by its first `Name` child, with one term per nested `HPOId`. The
/// class label applies to every record in the document.
std::vector<VariantRecord> load_orphadata_xml(std::string_view text, std::string_view class_label);

/// Checks non-empty labels and dataset-wide variant uniqueness.
void validate_records(const std::vector<VariantRecord>& records);

struct RowLabel {
    std::string class_label;
    std::string variant;

    friend bool operator==(const RowLabel&, const RowLabel&) = default;
};

/// N x d binary matrix, row-major, with class/variant labels per row and a
/// display label per column.
class PhenotypeMatrix {
public:
    PhenotypeMatrix() = default;
    PhenotypeMatrix(std::vector<RowLabel> rows, std::vector<std::string> features,
                    std::vector<std::uint8_t> cells);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return features_.size(); }

    std::uint8_t at(std::size_t i, std::size_t j) const { return cells_[i * cols() + j]; }
    std::span<const std::uint8_t> row(std::size_t i) const {
        return {cells_.data() + i * cols(), cols()};
    }
    std::span<const std::uint8_t> cells() const { return cells_; }

    const std::vector<RowLabel>& row_labels() const { return rows_; }
    const std::vector<std::string>& feature_labels() const { return features_; }

    /// Class label of every row, in row order.
    std::vector<std::string> class_column() const;

    /// Distinct classes in order of first appearance.
    std::vector<std::string> classes() const;

    /// Number of rows with feature j present.
    std::size_t support(std::size_t j) const;

private:
    std::vector<RowLabel> rows_;
    std::vector<std::string> features_;
    std::vector<std::uint8_t> cells_;
};

struct RecordReport {
    std::string variant;
    std::size_t terms = 0;
    std::size_t dropped = 0;
    std::size_t unknown = 0;
    std::vector<std::string> unknown_terms;
};

struct MatrixBuild {
    PhenotypeMatrix matrix;
    std::vector<RecordReport> report;  // one per record, input order
    Warnings warnings;
};

/// cell(i, j) = 1 iff category j is in reduce_terms(record i). All-zero rows
/// are kept and reported as warnings.
MatrixBuild build_matrix(const std::vector<VariantRecord>& records, const OntologyGraph& graph,
                         const CategorySet& categories, bool strict = false);

/// Per-class feature counts, classes in first-appearance order.
struct FrequencyTable {
    std::vector<std::string> classes;
    std::vector<std::string> features;
    std::vector<std::size_t> class_sizes;
    std::vector<std::size_t> counts;  // classes x features, row-major

    std::size_t count(std::size_t c, std::size_t f) const { return counts[c * features.size() + f]; }
    std::size_t feature_total(std::size_t f) const;
};

FrequencyTable class_feature_frequencies(const PhenotypeMatrix& matrix);

/// `class,variant,<feature...>` with 0/1 cells.
std::string write_matrix_csv(const PhenotypeMatrix& matrix);
PhenotypeMatrix read_matrix_csv(std::string_view text);

/// `class,feature,count`, one line per (class, feature) pair.
std::string write_frequency_csv(const FrequencyTable& table);

/// `variant,class,terms,dropped,unknown,unknown_terms`.
std::string write_ingest_report_csv(const PhenotypeMatrix& matrix,
                                    const std::vector<RecordReport>& report);

}  // namespace phenomap

#endif
