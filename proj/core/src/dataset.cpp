#include "phenomap/dataset.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "phenomap/csv.hpp"

namespace phenomap {

namespace {

std::string trimmed(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_terms(std::string_view field) {
    std::vector<std::string> out;
    if (trimmed(field).empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto bar = field.find('|', start);
        auto piece = trimmed(field.substr(start, bar == std::string_view::npos ? bar : bar - start));
        if (!piece.empty()) out.push_back(std::move(piece));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return out;
}

using boost::property_tree::ptree;

void collect_hpo_ids(const ptree& node, std::vector<std::string>& out) {
    for (const auto& [key, child] : node) {
        if (key == "HPOId") {
            auto id = trimmed(child.get_value<std::string>());
            if (!id.empty()) out.push_back(std::move(id));
        } else if (key != "<xmlattr>" && key != "<xmlcomment>") {
            collect_hpo_ids(child, out);
        }
    }
}

void collect_disorders(const ptree& node, std::string_view class_label,
                       std::vector<VariantRecord>& out) {
    for (const auto& [key, child] : node) {
        if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
        if (key != "Disorder") {
            collect_disorders(child, class_label, out);
            continue;
        }
        auto name = child.get_child_optional("Name");
        if (!name) {
            throw InputError("Disorder element #" + std::to_string(out.size() + 1) +
                             " has no Name child");
        }
        VariantRecord rec;
        rec.class_label = std::string(class_label);
        rec.variant_name = trimmed(name->get_value<std::string>());
        collect_hpo_ids(child, rec.term_ids);
        out.push_back(std::move(rec));
    }
}

}  // namespace

std::vector<VariantRecord> load_variants_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw InputError("variants CSV is empty (expected header class,variant,terms)");
    const auto& header = rows.front().fields;
    if (header != std::vector<std::string>{"class", "variant", "terms"}) {
        throw InputError("line " + std::to_string(rows.front().line) +
                         ": header must be exactly class,variant,terms");
    }
    std::vector<VariantRecord> records;
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto where = "line " + std::to_string(row.line) + ": ";
        if (row.fields.size() != 3) {
            throw InputError(where + "expected 3 fields, found " + std::to_string(row.fields.size()));
        }
        VariantRecord rec{trimmed(row.fields[0]), trimmed(row.fields[1]), split_terms(row.fields[2])};
        if (rec.class_label.empty()) throw InputError(where + "empty class label");
        if (rec.variant_name.empty()) throw InputError(where + "empty variant name");
        if (auto [it, ok] = seen.emplace(rec.variant_name, row.line); !ok) {
            throw InputError(where + "duplicate variant '" + rec.variant_name +
                             "' (first on line " + std::to_string(it->second) + ")");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<VariantRecord> load_orphadata_xml(std::string_view text, std::string_view class_label) {
    if (trimmed(class_label).empty()) throw UsageError("Orphadata input requires a class label");
    ptree tree;
    std::istringstream in{std::string(text)};
    try {
        boost::property_tree::read_xml(in, tree);
    } catch (const boost::property_tree::xml_parser_error& e) {
        throw InputError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
    }
    std::vector<VariantRecord> records;
    collect_disorders(tree, trimmed(class_label), records);
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].variant_name.empty()) {
            throw InputError("Disorder element #" + std::to_string(i + 1) + " has an empty Name");
        }
    }
    return records;
}

void validate_records(const std::vector<VariantRecord>& records) {
    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
        if (r.class_label.empty()) throw InputError("record '" + r.variant_name + "' has no class label");
        if (r.variant_name.empty()) throw InputError("record with empty variant name");
        if (!seen.insert(r.variant_name).second) {
            throw InputError("duplicate variant name: " + r.variant_name);
        }
    }
}

PhenotypeMatrix::PhenotypeMatrix(std::vector<RowLabel> rows, std::vector<std::string> features,
                                 std::vector<std::uint8_t> cells)
    : rows_(std::move(rows)), features_(std::move(features)), cells_(std::move(cells)) {
    if (cells_.size() != rows_.size() * features_.size()) {
        throw InputError("matrix cell count does not match rows x features");
    }
    if (std::any_of(cells_.begin(), cells_.end(), [](std::uint8_t v) { return v > 1; })) {
        throw InputError("matrix cells must be 0 or 1");
    }
}

std::vector<std::string> PhenotypeMatrix::class_column() const {
    std::vector<std::string> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.class_label);
    return out;
}

std::vector<std::string> PhenotypeMatrix::classes() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& r : rows_) {
        if (seen.insert(r.class_label).second) out.push_back(r.class_label);
    }
    return out;
}

std::size_t PhenotypeMatrix::support(std::size_t j) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < rows(); ++i) n += at(i, j);
    return n;
}

MatrixBuild build_matrix(const std::vector<VariantRecord>& records, const OntologyGraph& graph,
                         const CategorySet& categories, bool strict) {
    if (records.empty()) throw InputError("no records to build a matrix from");
    if (categories.empty()) throw InputError("category set is empty");
    validate_records(records);

    MatrixBuild out;
    const std::size_t d = categories.size();
    std::vector<RowLabel> rows;
    std::vector<std::uint8_t> cells(records.size() * d, 0);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        Reduction red;
        try {
            red = reduce_terms(graph, categories, rec.term_ids, strict);
        } catch (const InputError& e) {
            throw InputError("variant '" + rec.variant_name + "': " + e.what());
        }
        for (auto pos : red.positions) cells[i * d + pos] = 1;
        if (red.positions.empty()) {
            out.warnings.push_back("variant '" + rec.variant_name +
                                   "' has no mappable terms; keeping an all-zero row");
        }
        rows.push_back({rec.class_label, rec.variant_name});
        out.report.push_back(
            {rec.variant_name, rec.term_ids.size(), red.dropped, red.unknown, red.unknown_terms});
    }
    out.matrix = PhenotypeMatrix(std::move(rows), categories.labels(), std::move(cells));
    return out;
}

std::size_t FrequencyTable::feature_total(std::size_t f) const {
    std::size_t total = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) total += count(c, f);
    return total;
}

FrequencyTable class_feature_frequencies(const PhenotypeMatrix& matrix) {
    FrequencyTable t;
    t.classes = matrix.classes();
    t.features = matrix.feature_labels();
    t.class_sizes.assign(t.classes.size(), 0);
    t.counts.assign(t.classes.size() * t.features.size(), 0);
    std::unordered_map<std::string, std::size_t> class_index;
    for (std::size_t c = 0; c < t.classes.size(); ++c) class_index[t.classes[c]] = c;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto c = class_index.at(matrix.row_labels()[i].class_label);
        ++t.class_sizes[c];
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            t.counts[c * t.features.size() + j] += matrix.at(i, j);
        }
    }
    return t;
}

std::string write_matrix_csv(const PhenotypeMatrix& matrix) {
    std::vector<std::string> header{"class", "variant"};
    header.insert(header.end(), matrix.feature_labels().begin(), matrix.feature_labels().end());
    std::string out = csv::format_row(header);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out += csv::escape(matrix.row_labels()[i].class_label);
        out.push_back(',');
        out += csv::escape(matrix.row_labels()[i].variant);
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            out.push_back(',');
            out.push_back(matrix.at(i, j) ? '1' : '0');
        }
        out.push_back('\n');
    }
    return out;
}

PhenotypeMatrix read_matrix_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw InputError("matrix CSV is empty");
    const auto& header = rows.front().fields;
    if (header.size() < 3 || header[0] != "class" || header[1] != "variant") {
        throw InputError("line 1: matrix header must start with class,variant and name at least one feature");
    }
    std::vector<std::string> features(header.begin() + 2, header.end());
    const std::size_t d = features.size();
    std::vector<RowLabel> labels;
    std::vector<std::uint8_t> cells;
    cells.reserve((rows.size() - 1) * d);
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto where = "line " + std::to_string(row.line) + ": ";
        if (row.fields.size() != d + 2) {
            throw InputError(where + "expected " + std::to_string(d + 2) + " fields, found " +
                             std::to_string(row.fields.size()));
        }
        if (row.fields[0].empty() || row.fields[1].empty()) throw InputError(where + "empty label");
        if (!seen.insert(row.fields[1]).second) {
            throw InputError(where + "duplicate variant '" + row.fields[1] + "'");
        }
        labels.push_back({row.fields[0], row.fields[1]});
        for (std::size_t j = 0; j < d; ++j) {
            const auto& cell = row.fields[j + 2];
            if (cell != "0" && cell != "1") {
                throw InputError(where + "cell '" + cell + "' in column " + features[j] +
                                 " is not 0 or 1");
            }
            cells.push_back(cell == "1" ? 1 : 0);
        }
    }
    return PhenotypeMatrix(std::move(labels), std::move(features), std::move(cells));
}

std::string write_frequency_csv(const FrequencyTable& table) {
    std::string out = csv::format_row({"class", "feature", "count"});
    for (std::size_t c = 0; c < table.classes.size(); ++c) {
        for (std::size_t f = 0; f < table.features.size(); ++f) {
            out += csv::format_row({table.classes[c], table.features[f], std::to_string(table.count(c, f))});
        }
    }
    return out;
}

std::string write_ingest_report_csv(const PhenotypeMatrix& matrix,
                                    const std::vector<RecordReport>& report) {
    std::string out = csv::format_row({"variant", "class", "terms", "mapped_categories", "dropped",
                                       "unknown", "unknown_terms"});
    for (std::size_t i = 0; i < report.size(); ++i) {
        std::size_t mapped = 0;
        for (std::size_t j = 0; j < matrix.cols(); ++j) mapped += matrix.at(i, j);
        std::string unknown_terms;
        for (const auto& t : report[i].unknown_terms) {
            if (!unknown_terms.empty()) unknown_terms.push_back('|');
            unknown_terms += t;
        }
        out += csv::format_row({report[i].variant, matrix.row_labels()[i].class_label,
                                std::to_string(report[i].terms), std::to_string(mapped),
                                std::to_string(report[i].dropped), std::to_string(report[i].unknown),
                                unknown_terms});
    }
    return out;
}

}  // namespace phenomap
