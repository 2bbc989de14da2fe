#ifndef PHENOMAP_CENTROIDS_HPP
#define PHENOMAP_CENTROIDS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phenomap/dataset.hpp"
#include "phenomap/embed.hpp"
#include "phenomap/error.hpp"

namespace phenomap {

enum class CentroidKind { kClass, kFeature };

std::string_view to_string(CentroidKind kind);

struct Centroid {
    CentroidKind kind = CentroidKind::kClass;
    std::string label;
    double x = 0.0;
    double y = 0.0;
    std::size_t count = 0;  // observations averaged, always >= 1
};

/// Class and feature centroids; (kind, label) pairs are unique.
struct CentroidSet {
    std::vector<Centroid> entries;

    std::size_t count(CentroidKind kind) const;
    CentroidSet only(CentroidKind kind) const;
    void append(const CentroidSet& other);
};

/// Mean coordinate of each class, classes in order of first appearance.
CentroidSet class_centroids(std::span<const Point> coords, std::span<const std::string> labels);

/// Mean coordinate of the rows carrying each feature, in column order.
/// Features nobody carries are left out and reported in `warnings`.
CentroidSet feature_centroids(std::span<const Point> coords, const PhenotypeMatrix& matrix,
                              Warnings* warnings = nullptr);

/// `kind,label,x,y,count`.
std::string write_centroids_csv(const CentroidSet& set);
CentroidSet read_centroids_csv(std::string_view text);

/// Reorders `points` to follow the matrix rows, matching on variant name.
/// Throws InputError naming the first missing or unexpected variant.
std::vector<Point> align_coords(const PhenotypeMatrix& matrix, std::span<const LabeledPoint> points);

}  // namespace phenomap

#endif
