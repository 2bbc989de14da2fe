#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phenomap/centroids.hpp"
#include "phenomap/dataset.hpp"
#include "phenomap/error.hpp"
#include "phenomap/render.hpp"

using namespace phenomap;
namespace pt = phenomap::testing;

namespace {

const pt::ptree& root(const pt::ptree& doc) { return doc.get_child("svg"); }

double num_attr(const pt::ptree& node, const std::string& name) { return std::stod(pt::attr(node, name)); }

PlotSpec with_layers(std::string_view layers) {
    PlotSpec spec;
    spec.layers = parse_layers(layers);
    return spec;
}

const std::vector<Point> kThree = {{0, 0}, {1, 2}, {-3, 1}};

}  // namespace

TEST(ParseLayers, KnownTokensOnly) {
    const auto l = parse_layers("markers, class_centroids");
    EXPECT_TRUE(l.markers);
    EXPECT_TRUE(l.class_centroids);
    EXPECT_FALSE(l.class_colors);
    EXPECT_THROW(parse_layers("markers,glitter"), UsageError);
    EXPECT_THROW(parse_layers(""), UsageError);
}

TEST(PlotSpec, ValidateGuards) {
    PlotSpec s;
    EXPECT_NO_THROW(s.validate());
    s.margin = 300;
    EXPECT_THROW(s.validate(), UsageError);
    s = PlotSpec{};
    s.width = 0;
    EXPECT_THROW(s.validate(), UsageError);
    s = PlotSpec{};
    s.palette.clear();
    EXPECT_THROW(s.validate(), UsageError);
}

TEST(RenderScatter, MarkersOnly) {
    const auto svg = render_scatter(kThree, {}, {}, with_layers("markers"));
    const auto doc = pt::parse_xml(svg);
    const auto circles = pt::elements(root(doc), "circle");
    EXPECT_EQ(circles.size(), 3u);
    EXPECT_EQ(pt::count_class(circles, "marker"), 3u);
}

TEST(RenderScatter, ClassCentroidsAddRingedMarkersAndLabels) {
    const std::vector<std::string> labels = {"A", "A", "B"};
    const auto set = class_centroids(kThree, labels);
    const auto svg = render_scatter(kThree, labels, set, with_layers("markers,class_centroids"));
    const auto doc = pt::parse_xml(svg);
    const auto circles = pt::elements(root(doc), "circle");
    EXPECT_EQ(circles.size(), 5u);
    EXPECT_EQ(pt::count_class(circles, "class-centroid"), 2u);
    for (const auto& c : circles) {
        if (pt::attr(c, "class") != "marker") {
            EXPECT_EQ(pt::attr(c, "stroke"), "#000000");
        }
    }
    EXPECT_EQ(pt::count_class(pt::elements(root(doc), "text"), "centroid-label"), 2u);
}

TEST(RenderScatter, DeterministicBytes) {
    const std::vector<std::string> labels = {"A", "B", "B"};
    const auto set = class_centroids(kThree, labels);
    const auto spec = with_layers("markers,class_colors,class_centroids");
    EXPECT_EQ(render_scatter(kThree, labels, set, spec), render_scatter(kThree, labels, set, spec));
}

TEST(RenderScatter, ClassColoursFollowPaletteAndLegend) {
    const std::vector<std::string> labels = {"A", "B", "A"};
    auto spec = with_layers("markers,class_colors");
    spec.palette = {"#111111", "#222222"};
    const auto doc = pt::parse_xml(render_scatter(kThree, labels, {}, spec));
    const auto circles = pt::elements(root(doc), "circle");
    EXPECT_EQ(pt::attr(circles[0], "fill"), "#111111");
    EXPECT_EQ(pt::attr(circles[1], "fill"), "#222222");
    EXPECT_EQ(pt::attr(circles[2], "fill"), "#111111");
    EXPECT_EQ(pt::count_class(pt::elements(root(doc), "rect"), "legend-swatch"), 2u);
}

TEST(RenderScatter, MissingLayerInputsRejected) {
    EXPECT_THROW(render_scatter(kThree, {}, {}, with_layers("markers,class_colors")), UsageError);
    EXPECT_THROW(render_scatter(kThree, {}, {}, with_layers("markers,class_centroids")), UsageError);
    EXPECT_THROW(render_scatter(kThree, {}, {}, with_layers("feature_centroids")), UsageError);
    EXPECT_THROW(render_scatter({}, {}, {}, with_layers("markers")), UsageError);
}

TEST(RenderScatter, LabelsEscapedAndOverlapsStaggered) {
    CentroidSet set{{{CentroidKind::kFeature, "a<b & c", 0, 0, 1}, {CentroidKind::kFeature, "a<b & d", 0, 0, 1}}};
    const auto doc = pt::parse_xml(render_scatter(kThree, {}, set, with_layers("markers,feature_centroids")));
    std::vector<double> ys;
    for (const auto& t : pt::elements(root(doc), "text")) {
        if (pt::attr(t, "class") == "centroid-label feature-label") ys.push_back(num_attr(t, "y"));
    }
    ASSERT_EQ(ys.size(), 2u);
    EXPECT_NE(ys[0], ys[1]);
    EXPECT_EQ(pt::count_class(pt::elements(root(doc), "circle"), "feature-centroid"), 2u);
}

TEST(FitTransform, AffineEquivariantAndInsideArea) {
    const auto pts = pt::random_points(20, 5, 4.0);
    const PlotArea area{50, 50, 750, 550};
    const auto tf = fit_transform(pts, area);
    Point mean{}, screen_mean{};
    for (auto p : pts) {
        const auto s = tf.apply(p);
        EXPECT_GE(s.x, area.left - 1e-9);
        EXPECT_LE(s.x, area.right + 1e-9);
        EXPECT_GE(s.y, area.top - 1e-9);
        EXPECT_LE(s.y, area.bottom + 1e-9);
        mean.x += p.x / 20;
        mean.y += p.y / 20;
        screen_mean.x += s.x / 20;
        screen_mean.y += s.y / 20;
    }
    const auto m = tf.apply(mean);
    EXPECT_NEAR(m.x, screen_mean.x, 1e-9);
    EXPECT_NEAR(m.y, screen_mean.y, 1e-9);
    EXPECT_LT(tf.apply({0, 1}).y, tf.apply({0, 0}).y);
    EXPECT_GT(tf.apply({1, 0}).x, tf.apply({0, 0}).x);
}

TEST(FitTransform, SinglePointCentred) {
    const std::vector<Point> one = {{5, 5}};
    const auto tf = fit_transform(one, PlotArea{0, 0, 100, 50});
    EXPECT_EQ(tf.apply(one[0]), (Point{50, 25}));
}

TEST(RenderStackedBars, LinearHeights) {
    const PhenotypeMatrix m({{"A", "a"}, {"A", "b"}, {"A", "c"}}, {"rare", "common"}, {0, 1, 0, 1, 1, 1});
    const auto doc = pt::parse_xml(render_stacked_bars(class_feature_frequencies(m), PlotSpec{}));
    std::vector<pt::ptree> segs;
    for (const auto& r : pt::elements(root(doc), "rect")) {
        if (pt::attr(r, "class") == "segment") segs.push_back(r);
    }
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_NEAR(num_attr(segs[0], "height"), 3 * num_attr(segs[1], "height"), 0.01);
    EXPECT_LT(num_attr(segs[0], "x"), num_attr(segs[1], "x"));
    EXPECT_EQ(segs[0].get<std::string>("title"), "A / common: 3");
}

TEST(RenderStackedBars, TwoEqualSegments) {
    const PhenotypeMatrix m({{"A", "a"}, {"B", "b"}}, {"f"}, {1, 1});
    const auto doc = pt::parse_xml(render_stacked_bars(class_feature_frequencies(m), PlotSpec{}));
    std::vector<pt::ptree> segs;
    for (const auto& r : pt::elements(root(doc), "rect")) {
        if (pt::attr(r, "class") == "segment") segs.push_back(r);
    }
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_EQ(pt::attr(segs[0], "height"), pt::attr(segs[1], "height"));
    EXPECT_EQ(pt::attr(segs[0], "x"), pt::attr(segs[1], "x"));
    EXPECT_NE(pt::attr(segs[0], "fill"), pt::attr(segs[1], "fill"));
}

TEST(RenderStackedBars, FixtureHeightsProportionalToCounts) {
    const auto m = pt::three_cluster_matrix(15, 7);
    const auto table = class_feature_frequencies(m);
    const auto doc = pt::parse_xml(render_stacked_bars(table, PlotSpec{}));
    std::size_t max_total = 0;
    for (std::size_t f = 0; f < table.features.size(); ++f) max_total = std::max(max_total, table.feature_total(f));
    const double unit = stacked_bar_area(PlotSpec{}).height() / double(max_total);
    std::size_t seen = 0;
    for (const auto& r : pt::elements(root(doc), "rect")) {
        if (pt::attr(r, "class") != "segment") continue;
        const auto title = r.get<std::string>("title");
        const auto n = std::stod(title.substr(title.rfind(": ") + 2));
        EXPECT_NEAR(num_attr(r, "height"), unit * n, 0.5) << title;
        ++seen;
    }
    std::size_t nonzero = 0;
    for (auto c : table.counts) nonzero += c > 0;
    EXPECT_EQ(seen, nonzero);
    EXPECT_THROW(render_stacked_bars(FrequencyTable{}, PlotSpec{}), UsageError);
}

TEST(RenderImportanceBars, SingleBarSpansWidth) {
    ImportanceReport r;
    r.features = {"f"};
    r.classes = {"A"};
    r.mean_abs = {0.25};
    r.overall = {0.25};
    r.ranking = {0};
    const auto doc = pt::parse_xml(render_importance_bars(r, 1, PlotSpec{}));
    std::vector<pt::ptree> bars;
    for (const auto& b : pt::elements(root(doc), "rect")) {
        if (pt::attr(b, "class") == "bar") bars.push_back(b);
    }
    ASSERT_EQ(bars.size(), 1u);
    EXPECT_NEAR(num_attr(bars[0], "width"), importance_bar_area(PlotSpec{}).width(), 1e-3);
}

TEST(RenderImportanceBars, ZeroFeatureKeepsLabelAndEmptyBar) {
    ImportanceReport r;
    r.features = {"big", "none"};
    r.classes = {"A", "B"};
    r.mean_abs = {0.4, 0.1, 0.0, 0.0};
    r.overall = {0.4, 0.0};
    r.ranking = {0, 1};
    const auto doc = pt::parse_xml(render_importance_bars(r, 2, PlotSpec{}));
    std::size_t zero = 0;
    for (const auto& b : pt::elements(root(doc), "rect")) {
        if (pt::attr(b, "class") == "bar" && num_attr(b, "width") == 0.0) ++zero;
    }
    EXPECT_EQ(zero, 2u);
    bool labelled = false;
    for (const auto& t : pt::elements(root(doc), "text")) labelled = labelled || t.data() == "none";
    EXPECT_TRUE(labelled);
    EXPECT_THROW(render_importance_bars(r, 3, PlotSpec{}), UsageError);
}

TEST(RenderImportanceBars, FixtureLengthsProportional) {
    const auto m = pt::three_cluster_matrix(10, 4);
    const auto report = rank_features(m, fit_surrogate(m), 50, 1, 6);
    const auto doc = pt::parse_xml(render_importance_bars(report, 6, PlotSpec{}));
    double vmax = 0;
    for (std::size_t k = 0; k < 6; ++k) {
        for (std::size_t c = 0; c < 3; ++c) vmax = std::max(vmax, report.score(report.ranking[k], c));
    }
    const double width = importance_bar_area(PlotSpec{}).width();
    std::size_t bars = 0;
    for (const auto& b : pt::elements(root(doc), "rect")) {
        if (pt::attr(b, "class") != "bar") continue;
        const std::size_t f = report.ranking[bars / 3];
        EXPECT_NEAR(num_attr(b, "width"), width * report.score(f, bars % 3) / vmax, 0.5);
        ++bars;
    }
    EXPECT_EQ(bars, 18u);
}
