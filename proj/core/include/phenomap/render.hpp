#ifndef PHENOMAP_RENDER_HPP
#define PHENOMAP_RENDER_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phenomap/centroids.hpp"
#include "phenomap/dataset.hpp"
#include "phenomap/embed.hpp"
#include "phenomap/importance.hpp"

namespace phenomap {

struct Layers {
    bool markers = true;
    bool class_colors = false;
    bool class_centroids = false;
    bool feature_centroids = false;
};

/// Parses a comma-separated subset of
/// {markers, class_colors, class_centroids, feature_centroids}.
Layers parse_layers(std::string_view text);

struct PlotSpec {
    double width = 800;
    double height = 600;
    double margin = 50;
    double marker_radius = 4;
    double centroid_marker_radius = 9;
    Layers layers;
    std::vector<std::string> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double font_size = 10;
    double label_offset = 6;

    /// Throws UsageError on non-positive sizes, margin >= min(width, height) / 2
    /// or an empty palette.
    void validate() const;
};

/// Width reserved on the right for a class legend.
inline constexpr double kLegendWidth = 150;
/// Height reserved under the stacked bars for rotated feature labels.
inline constexpr double kBarLabelBand = 110;
/// Width reserved left of the importance bars for feature labels.
inline constexpr double kImportanceLabelGutter = 180;

/// Screen-space rectangle that data is mapped into.
struct PlotArea {
    double left = 0;
    double top = 0;
    double right = 0;
    double bottom = 0;

    double width() const { return right - left; }
    double height() const { return bottom - top; }
};

PlotArea scatter_area(const PlotSpec& spec, bool with_legend);
PlotArea stacked_bar_area(const PlotSpec& spec);
PlotArea importance_bar_area(const PlotSpec& spec);

/// Uniform-scale map from embedding units to screen pixels; y is flipped.
struct PlotTransform {
    double scale = 1;
    double offset_x = 0;
    double offset_y = 0;

    Point apply(Point p) const { return {offset_x + scale * p.x, offset_y - scale * p.y}; }
};

/// Fits the bounding box of `points` into `area`, centred, aspect preserved.
PlotTransform fit_transform(std::span<const Point> points, const PlotArea& area);

/// Scatter plot of `coords` with the layers in `spec`. `class_labels` (one per
/// point) and `centroids` may be empty when no requested layer needs them.
std::string render_scatter(std::span<const Point> coords, std::span<const std::string> class_labels,
                           const CentroidSet& centroids, const PlotSpec& spec);

/// One column per feature ordered by total count, one segment per class.
std::string render_stacked_bars(const FrequencyTable& table, const PlotSpec& spec);

/// Horizontal grouped bars of mean |attribution| for the top_k ranked features.
std::string render_importance_bars(const ImportanceReport& report, std::size_t top_k,
                                   const PlotSpec& spec);

}  // namespace phenomap

#endif
