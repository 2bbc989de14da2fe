#include "phenomap/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "phenomap/error.hpp"

namespace phenomap {

namespace {

constexpr const char* kMarkerGrey = "#808080";
constexpr const char* kInk = "#222222";

std::string num(double v) {
    if (std::abs(v) < 0.0005) v = 0.0;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

class SvgWriter {
public:
    SvgWriter(const PlotSpec& spec) : spec_(spec) {
        out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
        out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(spec.width) +
                "\" height=\"" + num(spec.height) + "\" viewBox=\"0 0 " + num(spec.width) + " " +
                num(spec.height) + "\" font-family=\"sans-serif\" font-size=\"" + num(spec.font_size) +
                "\">\n";
        out_ += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + num(spec.width) + "\" height=\"" +
                num(spec.height) + "\" fill=\"#ffffff\"/>\n";
    }

    void line(double x1, double y1, double x2, double y2) {
        out_ += "<line class=\"axis\" x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
                "\" y2=\"" + num(y2) + "\" stroke=\"" + kInk + "\" stroke-width=\"1\"/>\n";
    }

    void text(double x, double y, std::string_view body, std::string_view cls,
              std::string_view anchor = "start", std::string_view transform = {}) {
        out_ += "<text class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
                "\" text-anchor=\"" + std::string(anchor) + "\"";
        if (!transform.empty()) out_ += " transform=\"" + std::string(transform) + "\"";
        out_ += " fill=\"" + std::string(kInk) + "\">" + xml_escape(body) + "</text>\n";
    }

    void rect(std::string_view cls, double x, double y, double w, double h, std::string_view fill,
              std::string_view title = {}) {
        out_ += "<rect class=\"" + std::string(cls) + "\" x=\"" + num(x) + "\" y=\"" + num(y) +
                "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"" + xml_escape(fill) + "\"";
        if (title.empty()) {
            out_ += "/>\n";
        } else {
            out_ += "><title>" + xml_escape(title) + "</title></rect>\n";
        }
    }

    void circle(std::string_view cls, Point c, double r, std::string_view fill, bool ringed) {
        out_ += "<circle class=\"" + std::string(cls) + "\" cx=\"" + num(c.x) + "\" cy=\"" + num(c.y) +
                "\" r=\"" + num(r) + "\" fill=\"" + xml_escape(fill) + "\"";
        if (ringed) out_ += " stroke=\"#000000\" stroke-width=\"2\"";
        out_ += "/>\n";
    }

    void legend(const std::vector<std::string>& classes, const std::vector<std::string>& colours,
                double left, double top) {
        const double step = spec_.font_size + 8;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const double y = top + step * static_cast<double>(c);
            rect("legend-swatch", left, y, spec_.font_size, spec_.font_size, colours[c]);
            text(left + spec_.font_size + 6, y + spec_.font_size - 1, classes[c], "legend-label");
        }
    }

    std::string finish() {
        out_ += "</svg>\n";
        return std::move(out_);
    }

private:
    const PlotSpec& spec_;
    std::string out_;
};

std::vector<std::string> colours_for(const std::vector<std::string>& classes, const PlotSpec& spec) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < classes.size(); ++c) out.push_back(spec.palette[c % spec.palette.size()]);
    return out;
}

void require_area(const PlotArea& area, std::string_view what) {
    if (!(area.width() > 0) || !(area.height() > 0)) {
        throw UsageError(std::string(what) + ": plot too small for its margins and labels");
    }
}

}  // namespace

Layers parse_layers(std::string_view text) {
    Layers layers{false, false, false, false};
    std::size_t start = 0;
    bool any = false;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        auto token = text.substr(start, comma - start);
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        if (token == "markers") {
            layers.markers = true;
        } else if (token == "class_colors") {
            layers.class_colors = true;
        } else if (token == "class_centroids") {
            layers.class_centroids = true;
        } else if (token == "feature_centroids") {
            layers.feature_centroids = true;
        } else {
            throw UsageError("unknown layer '" + std::string(token) + "'");
        }
        any = true;
        start = comma + 1;
    }
    if (!any) throw UsageError("no layers requested");
    return layers;
}

void PlotSpec::validate() const {
    if (!(width > 0) || !(height > 0)) throw UsageError("plot dimensions must be positive");
    if (!(margin >= 0) || !(margin < std::min(width, height) / 2)) {
        throw UsageError("margin must be below half the smaller plot dimension");
    }
    if (!(marker_radius > 0) || !(centroid_marker_radius > 0) || !(font_size > 0)) {
        throw UsageError("marker radii and font size must be positive");
    }
    if (palette.empty()) throw UsageError("palette must not be empty");
}

PlotArea scatter_area(const PlotSpec& spec, bool with_legend) {
    return {spec.margin, spec.margin, spec.width - spec.margin - (with_legend ? kLegendWidth : 0.0),
            spec.height - spec.margin};
}

PlotArea stacked_bar_area(const PlotSpec& spec) {
    return {spec.margin, spec.margin, spec.width - spec.margin - kLegendWidth,
            spec.height - spec.margin - kBarLabelBand};
}

PlotArea importance_bar_area(const PlotSpec& spec) {
    return {spec.margin + kImportanceLabelGutter, spec.margin, spec.width - spec.margin - kLegendWidth,
            spec.height - spec.margin};
}

PlotTransform fit_transform(std::span<const Point> points, const PlotArea& area) {
    if (points.empty()) throw UsageError("nothing to plot");
    double minx = points[0].x, maxx = points[0].x, miny = points[0].y, maxy = points[0].y;
    for (const auto& p : points) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    double scale = 0;
    if (maxx > minx) scale = area.width() / (maxx - minx);
    if (maxy > miny) {
        const double sy = area.height() / (maxy - miny);
        scale = scale > 0 ? std::min(scale, sy) : sy;
    }
    if (!(scale > 0)) scale = 1;
    PlotTransform t;
    t.scale = scale;
    t.offset_x = 0.5 * (area.left + area.right) - scale * 0.5 * (minx + maxx);
    t.offset_y = 0.5 * (area.top + area.bottom) + scale * 0.5 * (miny + maxy);
    return t;
}

std::string render_scatter(std::span<const Point> coords, std::span<const std::string> class_labels,
                           const CentroidSet& centroids, const PlotSpec& spec) {
    spec.validate();
    const Layers& layers = spec.layers;
    if (coords.empty()) throw UsageError("cannot plot an empty embedding");
    if (!layers.markers && !layers.class_centroids && !layers.feature_centroids) {
        throw UsageError("no drawable layer requested");
    }
    if (layers.class_colors && class_labels.size() != coords.size()) {
        throw UsageError("layer class_colors needs one class label per observation");
    }
    const auto class_set = centroids.only(CentroidKind::kClass);
    const auto feature_set = centroids.only(CentroidKind::kFeature);
    if (layers.class_centroids && class_set.entries.empty()) {
        throw UsageError("layer class_centroids needs class centroids");
    }
    if (layers.feature_centroids && feature_set.entries.empty()) {
        throw UsageError("layer feature_centroids needs feature centroids");
    }

    // Classes in first-appearance order drive both colours and the legend.
    std::vector<std::string> classes;
    {
        std::unordered_map<std::string, bool> seen;
        for (const auto& c : class_labels) {
            if (seen.emplace(c, true).second) classes.push_back(c);
        }
        for (const auto& e : class_set.entries) {
            if (seen.emplace(e.label, true).second) classes.push_back(e.label);
        }
    }
    const auto colours = colours_for(classes, spec);
    std::unordered_map<std::string, std::string> colour_of;
    for (std::size_t c = 0; c < classes.size(); ++c) colour_of.emplace(classes[c], colours[c]);

    std::vector<Point> plotted;
    if (layers.markers) plotted.assign(coords.begin(), coords.end());
    std::vector<const Centroid*> drawn;
    if (layers.class_centroids) {
        for (const auto& e : class_set.entries) drawn.push_back(&e);
    }
    if (layers.feature_centroids) {
        for (const auto& e : feature_set.entries) drawn.push_back(&e);
    }
    for (const auto* e : drawn) plotted.push_back({e->x, e->y});

    const PlotArea area = scatter_area(spec, layers.class_colors);
    require_area(area, "scatter plot");
    const PlotTransform tf = fit_transform(plotted, area);

    SvgWriter svg(spec);
    svg.line(area.left, area.bottom, area.right, area.bottom);
    svg.line(area.left, area.top, area.left, area.bottom);
    svg.text(0.5 * (area.left + area.right), area.bottom + spec.margin * 0.6, "x (arbitrary units)",
             "axis-caption", "middle");
    const double yx = area.left - spec.margin * 0.4;
    const double yy = 0.5 * (area.top + area.bottom);
    svg.text(yx, yy, "y (arbitrary units)", "axis-caption", "middle",
             "rotate(-90 " + num(yx) + " " + num(yy) + ")");

    if (layers.markers) {
        for (std::size_t i = 0; i < coords.size(); ++i) {
            const auto fill = layers.class_colors ? colour_of.at(class_labels[i]) : std::string(kMarkerGrey);
            svg.circle("marker", tf.apply(coords[i]), spec.marker_radius, fill, false);
        }
    }

    struct LabelBox {
        double x, y, w, h;
    };
    std::vector<std::size_t> label_order(drawn.size());
    std::iota(label_order.begin(), label_order.end(), std::size_t{0});
    std::stable_sort(label_order.begin(), label_order.end(), [&](std::size_t a, std::size_t b) {
        return drawn[a]->label < drawn[b]->label;
    });
    std::vector<double> label_y(drawn.size());
    std::vector<LabelBox> placed;
    const double r = spec.centroid_marker_radius;
    for (auto idx : label_order) {
        const Point at = tf.apply({drawn[idx]->x, drawn[idx]->y});
        LabelBox box{at.x + r + spec.label_offset, at.y + spec.font_size / 3.0,
                     0.6 * spec.font_size * static_cast<double>(drawn[idx]->label.size()), spec.font_size};
        auto overlaps = [&](const LabelBox& a, const LabelBox& b) {
            return a.x < b.x + b.w && b.x < a.x + a.w && a.y - a.h < b.y && b.y - b.h < a.y;
        };
        for (std::size_t guard = 0; guard < placed.size() + 1; ++guard) {
            bool clash = false;
            for (const auto& p : placed) clash = clash || overlaps(box, p);
            if (!clash) break;
            box.y += spec.font_size + 2;
        }
        placed.push_back(box);
        label_y[idx] = box.y;
    }

    for (std::size_t idx = 0; idx < drawn.size(); ++idx) {
        const auto& e = *drawn[idx];
        const Point at = tf.apply({e.x, e.y});
        if (e.kind == CentroidKind::kClass) {
            svg.circle("centroid class-centroid", at, r, colour_of.at(e.label), true);
        } else {
            svg.circle("centroid feature-centroid", at, r, "#ffffff", true);
        }
        svg.text(at.x + r + spec.label_offset, label_y[idx], e.label,
                 e.kind == CentroidKind::kClass ? "centroid-label class-label" : "centroid-label feature-label");
    }

    if (layers.class_colors) svg.legend(classes, colours, area.right + 20, area.top);
    return svg.finish();
}

std::string render_stacked_bars(const FrequencyTable& table, const PlotSpec& spec) {
    spec.validate();
    if (table.classes.empty() || table.features.empty()) {
        throw UsageError("cannot plot an empty frequency table");
    }
    const PlotArea area = stacked_bar_area(spec);
    require_area(area, "stacked bar chart");
    const std::size_t d = table.features.size();

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.feature_total(a) > table.feature_total(b);
    });
    std::size_t max_total = 0;
    for (std::size_t f = 0; f < d; ++f) max_total = std::max(max_total, table.feature_total(f));
    const double unit = max_total > 0 ? area.height() / static_cast<double>(max_total) : 0.0;

    const auto colours = colours_for(table.classes, spec);
    const double slot = area.width() / static_cast<double>(d);
    const double bar = 0.8 * slot;

    SvgWriter svg(spec);
    svg.line(area.left, area.bottom, area.right, area.bottom);
    svg.line(area.left, area.top, area.left, area.bottom);
    svg.text(area.left - 6, area.top + spec.font_size / 3.0, std::to_string(max_total), "axis-caption", "end");
    svg.text(area.left - 6, area.bottom, "0", "axis-caption", "end");

    for (std::size_t col = 0; col < d; ++col) {
        const std::size_t f = order[col];
        const double x = area.left + slot * static_cast<double>(col) + 0.5 * (slot - bar);
        double base = area.bottom;
        for (std::size_t c = 0; c < table.classes.size(); ++c) {
            const std::size_t n = table.count(c, f);
            if (n == 0) continue;
            const double h = unit * static_cast<double>(n);
            base -= h;
            svg.rect("segment", x, base, bar, h, colours[c],
                     table.classes[c] + " / " + table.features[f] + ": " + std::to_string(n));
        }
        const double lx = x + 0.5 * bar;
        const double ly = area.bottom + 12;
        svg.text(lx, ly, table.features[f], "feature-label", "end",
                 "rotate(-60 " + num(lx) + " " + num(ly) + ")");
    }
    svg.legend(table.classes, colours, area.right + 20, area.top);
    return svg.finish();
}

std::string render_importance_bars(const ImportanceReport& report, std::size_t top_k,
                                   const PlotSpec& spec) {
    spec.validate();
    if (top_k > report.ranking.size()) {
        throw UsageError("top_k " + std::to_string(top_k) + " exceeds the " +
                         std::to_string(report.ranking.size()) + " ranked features");
    }
    if (report.classes.empty()) throw UsageError("importance report has no classes");
    const PlotArea area = importance_bar_area(spec);
    require_area(area, "importance chart");
    const std::size_t k = report.classes.size();

    double vmax = 0;
    for (std::size_t r = 0; r < top_k; ++r) {
        for (std::size_t c = 0; c < k; ++c) vmax = std::max(vmax, report.score(report.ranking[r], c));
    }
    const auto colours = colours_for(report.classes, spec);

    SvgWriter svg(spec);
    svg.text(area.left, spec.margin * 0.6, "Mean |Shapley value| per class (nearest-centroid surrogate)",
             "chart-title");
    svg.line(area.left, area.top, area.left, area.bottom);
    if (top_k > 0) {
        const double group = area.height() / static_cast<double>(top_k);
        const double bar = 0.8 * group / static_cast<double>(k);
        for (std::size_t r = 0; r < top_k; ++r) {
            const std::size_t f = report.ranking[r];
            const double top = area.top + group * static_cast<double>(r) + 0.1 * group;
            for (std::size_t c = 0; c < k; ++c) {
                const double v = report.score(f, c);
                const double len = vmax > 0 ? area.width() * (v / vmax) : 0.0;
                char value[32];
                std::snprintf(value, sizeof(value), "%.6g", v);
                svg.rect("bar", area.left, top + bar * static_cast<double>(c), len, bar, colours[c],
                         report.features[f] + " / " + report.classes[c] + ": " + value);
            }
            svg.text(area.left - 8, top + 0.4 * group + spec.font_size / 3.0, report.features[f],
                     "feature-label", "end");
        }
    }
    svg.legend(report.classes, colours, area.right + 20, area.top);
    return svg.finish();
}

}  // namespace phenomap
