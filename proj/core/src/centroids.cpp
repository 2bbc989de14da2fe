#include "phenomap/centroids.hpp"

#include <cmath>
#include <set>
#include <unordered_map>
#include <utility>

#include "phenomap/csv.hpp"

namespace phenomap {

std::string_view to_string(CentroidKind kind) {
    return kind == CentroidKind::kClass ? "class" : "feature";
}

std::size_t CentroidSet::count(CentroidKind kind) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.kind == kind;
    return n;
}

CentroidSet CentroidSet::only(CentroidKind kind) const {
    CentroidSet out;
    for (const auto& e : entries) {
        if (e.kind == kind) out.entries.push_back(e);
    }
    return out;
}

void CentroidSet::append(const CentroidSet& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

CentroidSet class_centroids(std::span<const Point> coords, std::span<const std::string> labels) {
    if (coords.empty()) throw UsageError("class centroids need at least one observation");
    if (coords.size() != labels.size()) {
        throw UsageError("class labels (" + std::to_string(labels.size()) +
                         ") do not align with coordinates (" + std::to_string(coords.size()) + ")");
    }
    CentroidSet out;
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::pair<double, double>> sums;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        auto [it, inserted] = slot.emplace(labels[i], out.entries.size());
        if (inserted) {
            out.entries.push_back({CentroidKind::kClass, labels[i], 0.0, 0.0, 0});
            sums.emplace_back(0.0, 0.0);
        }
        sums[it->second].first += coords[i].x;
        sums[it->second].second += coords[i].y;
        ++out.entries[it->second].count;
    }
    for (std::size_t c = 0; c < out.entries.size(); ++c) {
        const auto n = static_cast<double>(out.entries[c].count);
        out.entries[c].x = sums[c].first / n;
        out.entries[c].y = sums[c].second / n;
    }
    return out;
}

CentroidSet feature_centroids(std::span<const Point> coords, const PhenotypeMatrix& matrix,
                              Warnings* warnings) {
    if (coords.size() != matrix.rows()) {
        throw UsageError("coordinates (" + std::to_string(coords.size()) +
                         ") do not align with matrix rows (" + std::to_string(matrix.rows()) + ")");
    }
    CentroidSet out;
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
        double sx = 0.0, sy = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < matrix.rows(); ++i) {
            if (!matrix.at(i, j)) continue;
            sx += coords[i].x;
            sy += coords[i].y;
            ++n;
        }
        if (n == 0) {
            if (warnings) {
                warnings->push_back("feature '" + matrix.feature_labels()[j] +
                                    "' has no observations; centroid omitted");
            }
            continue;
        }
        const auto nf = static_cast<double>(n);
        out.entries.push_back({CentroidKind::kFeature, matrix.feature_labels()[j], sx / nf, sy / nf, n});
    }
    return out;
}

std::string write_centroids_csv(const CentroidSet& set) {
    std::string out = csv::format_row({"kind", "label", "x", "y", "count"});
    for (const auto& e : set.entries) {
        out += csv::format_row({std::string(to_string(e.kind)), e.label, csv::format_double(e.x),
                                csv::format_double(e.y), std::to_string(e.count)});
    }
    return out;
}

CentroidSet read_centroids_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() ||
        rows.front().fields != std::vector<std::string>{"kind", "label", "x", "y", "count"}) {
        throw InputError("line 1: centroids header must be exactly kind,label,x,y,count");
    }
    CentroidSet out;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const auto where = "line " + std::to_string(rows[r].line);
        if (f.size() != 5) throw InputError(where + ": expected 5 fields");
        Centroid c;
        if (f[0] == "class") {
            c.kind = CentroidKind::kClass;
        } else if (f[0] == "feature") {
            c.kind = CentroidKind::kFeature;
        } else {
            throw InputError(where + ": kind must be class or feature");
        }
        if (!seen.emplace(f[0], f[1]).second) {
            throw InputError(where + ": duplicate " + f[0] + " centroid '" + f[1] + "'");
        }
        c.label = f[1];
        c.x = csv::parse_double(f[2], where + " x");
        c.y = csv::parse_double(f[3], where + " y");
        c.count = csv::parse_size(f[4], where + " count");
        if (c.count == 0) throw InputError(where + ": centroid count must be positive");
        if (!std::isfinite(c.x) || !std::isfinite(c.y)) throw InputError(where + ": non-finite coordinate");
        out.entries.push_back(std::move(c));
    }
    return out;
}

std::vector<Point> align_coords(const PhenotypeMatrix& matrix, std::span<const LabeledPoint> points) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < points.size(); ++k) index.emplace(points[k].variant, k);
    std::vector<Point> out;
    out.reserve(matrix.rows());
    for (const auto& label : matrix.row_labels()) {
        auto it = index.find(label.variant);
        if (it == index.end()) throw InputError("coords file has no row for variant '" + label.variant + "'");
        out.push_back(points[it->second].point);
    }
    if (points.size() != matrix.rows()) {
        std::unordered_map<std::string, bool> known;
        for (const auto& label : matrix.row_labels()) known.emplace(label.variant, true);
        for (const auto& p : points) {
            if (!known.count(p.variant)) {
                throw InputError("coords file has variant '" + p.variant + "' not present in the matrix");
            }
        }
    }
    return out;
}

}  // namespace phenomap
