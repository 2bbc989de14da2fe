#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "phenomap/centroids.hpp"
#include "phenomap/csv.hpp"
#include "phenomap/dataset.hpp"
#include "phenomap/error.hpp"
#include "phenomap/ontology.hpp"

namespace phenomap::pipeline {

namespace {

// Prefixes input errors with the file they came from.
template <class F>
auto in_file(const fs::path& path, F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

template <class F>
auto from_file(const fs::path& path, F&& f) {
    return in_file(path, [&] { return f(read_file(path)); });
}

void report_warnings(const Warnings& warnings, std::ostream& log) {
    for (const auto& w : warnings) log << "warning: " << w << '\n';
}

fs::path emit(const fs::path& dir, const char* name, std::string_view content) {
    const auto path = dir / name;
    write_file(path, content);
    return path;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        auto item = trim(s.substr(start, comma - start));
        if (!item.empty()) out.push_back(std::move(item));
        start = comma + 1;
    }
    return out;
}

template <class T>
T config_number(const ConfigMap& cfg, const std::string& key, T fallback) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    const auto& text = it->second;
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw UsageError("config key '" + key + "': invalid value '" + text + "'");
    }
    return value;
}

const std::string& config_required(const ConfigMap& cfg, const std::string& key) {
    auto it = cfg.find(key);
    if (it == cfg.end() || it->second.empty()) throw UsageError("missing config key: " + key);
    return it->second;
}

bool config_bool(const ConfigMap& cfg, const std::string& key) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return false;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw UsageError("config key '" + key + "': expected true or false");
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InputError("failed writing " + path.string());
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

Outputs ingest(const IngestOptions& opt, std::ostream& log) {
    if (opt.csv_inputs.empty() && opt.xml_inputs.empty()) {
        throw UsageError("ingest needs at least one data file");
    }
    const auto graph = from_file(opt.ontology, [](const std::string& t) { return parse_obo(t); });
    Warnings warnings;
    const auto categories = from_file(opt.categories, [&](const std::string& t) {
        return parse_categories(t, graph, &warnings);
    });

    std::vector<VariantRecord> records;
    for (const auto& path : opt.csv_inputs) {
        auto part = from_file(path, [](const std::string& t) { return load_variants_csv(t); });
        records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    for (const auto& input : opt.xml_inputs) {
        auto part = from_file(input.path, [&](const std::string& t) {
            return load_orphadata_xml(t, input.class_label);
        });
        records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }

    const auto built = build_matrix(records, graph, categories, opt.strict);
    warnings.insert(warnings.end(), built.warnings.begin(), built.warnings.end());

    std::size_t dropped = 0, unknown = 0;
    for (const auto& r : built.report) {
        dropped += r.dropped;
        unknown += r.unknown;
    }
    report_warnings(warnings, log);
    log << "ingest: " << built.matrix.rows() << " observations x " << built.matrix.cols()
        << " features; " << dropped << " terms without a category, " << unknown
        << " unknown terms\n";

    Outputs out;
    out.push_back(emit(opt.out_dir, kMatrixFile, write_matrix_csv(built.matrix)));
    out.push_back(emit(opt.out_dir, kFrequencyFile,
                       write_frequency_csv(class_feature_frequencies(built.matrix))));
    out.push_back(emit(opt.out_dir, kIngestReportFile,
                       write_ingest_report_csv(built.matrix, built.report)));
    return out;
}

Outputs embed(const EmbedOptions& opt, std::ostream& log) {
    const auto matrix = from_file(opt.matrix, [](const std::string& t) { return read_matrix_csv(t); });
    const auto embedding = run_tsne(matrix, opt.config);
    report_warnings(embedding.warnings, log);
    log << "embed: " << embedding.coords.size() << " points, final KL "
        << csv::format_double(embedding.loss_trace.back()) << '\n';
    Outputs out;
    out.push_back(emit(opt.out_dir, kCoordsFile, write_coords_csv(embedding)));
    out.push_back(emit(opt.out_dir, kLossFile, write_loss_csv(embedding)));
    return out;
}

Outputs centroids(const CentroidOptions& opt, std::ostream& log) {
    const auto matrix = from_file(opt.matrix, [](const std::string& t) { return read_matrix_csv(t); });
    const auto points = from_file(opt.coords, [](const std::string& t) { return read_coords_csv(t); });
    const auto coords = in_file(opt.coords, [&] { return align_coords(matrix, points); });
    const auto labels = matrix.class_column();
    Warnings warnings;
    auto set = class_centroids(coords, labels);
    set.append(feature_centroids(coords, matrix, &warnings));
    report_warnings(warnings, log);
    log << "centroids: " << set.count(CentroidKind::kClass) << " classes, "
        << set.count(CentroidKind::kFeature) << " features\n";
    return {emit(opt.out_dir, kCentroidsFile, write_centroids_csv(set))};
}

Outputs importance(const ImportanceOptions& opt, std::ostream& log) {
    const auto matrix = from_file(opt.matrix, [](const std::string& t) { return read_matrix_csv(t); });
    const auto model = fit_surrogate(matrix);
    const auto report = rank_features(matrix, model, opt.permutations, opt.seed, opt.top_k, opt.aggregation);
    log << "importance: " << (report.exact ? "exact" : "sampled")
        << " Shapley values of a nearest-centroid surrogate; top " << opt.top_k << ":";
    for (const auto& f : report.top) log << ' ' << f;
    log << '\n';
    return {emit(opt.out_dir, kImportanceFile, write_importance_csv(report))};
}

Outputs plot(const PlotOptions& opt, std::ostream& log) {
    if (opt.out.empty()) throw UsageError("plot needs an output path");
    std::string svg;
    switch (opt.kind) {
        case PlotKind::kBars: {
            if (opt.matrix.empty()) throw UsageError("bar chart needs --matrix");
            const auto matrix = from_file(opt.matrix, [](const std::string& t) { return read_matrix_csv(t); });
            svg = render_stacked_bars(class_feature_frequencies(matrix), opt.spec);
            break;
        }
        case PlotKind::kImportance: {
            if (opt.importance.empty()) throw UsageError("importance chart needs --importance");
            const auto report = from_file(opt.importance, [](const std::string& t) { return read_importance_csv(t); });
            svg = render_importance_bars(report, std::min(opt.top_k, report.ranking.size()), opt.spec);
            break;
        }
        case PlotKind::kScatter: {
            const Layers& layers = opt.spec.layers;
            if (opt.coords.empty()) throw UsageError("scatter plot needs --coords");
            const auto points = from_file(opt.coords, [](const std::string& t) { return read_coords_csv(t); });
            std::vector<Point> coords;
            std::vector<std::string> labels;
            if (!opt.matrix.empty()) {
                const auto matrix = from_file(opt.matrix, [](const std::string& t) { return read_matrix_csv(t); });
                coords = in_file(opt.coords, [&] { return align_coords(matrix, points); });
                labels = matrix.class_column();
            } else if (layers.class_colors) {
                throw UsageError("layer class_colors needs --matrix for class labels");
            } else {
                for (const auto& p : points) coords.push_back(p.point);
            }
            CentroidSet set;
            if (layers.class_centroids || layers.feature_centroids) {
                if (opt.centroids.empty()) throw UsageError("centroid layers need --centroids");
                set = from_file(opt.centroids, [](const std::string& t) { return read_centroids_csv(t); });
            }
            if (layers.feature_centroids && !opt.importance.empty()) {
                const auto report = from_file(opt.importance, [](const std::string& t) { return read_importance_csv(t); });
                std::set<std::string> keep;
                for (std::size_t r = 0; r < std::min(opt.top_k, report.ranking.size()); ++r) {
                    keep.insert(report.features[report.ranking[r]]);
                }
                std::erase_if(set.entries, [&](const Centroid& c) {
                    return c.kind == CentroidKind::kFeature && !keep.count(c.label);
                });
            }
            svg = render_scatter(coords, labels, set, opt.spec);
            break;
        }
    }
    write_file(opt.out, svg);
    log << "plot: wrote " << opt.out.string() << '\n';
    return {opt.out};
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "ontology", "categories", "data", "orphadata", "out_dir", "strict",
        "perplexity", "iterations", "learning_rate", "exaggeration_factor", "exaggeration_iters",
        "momentum_early", "momentum_late", "momentum_switch_iter", "seed", "perplexity_tolerance",
        "calibration_max_iters", "permutations", "top_k", "aggregation", "layers", "width",
        "height", "margin", "marker_radius", "centroid_marker_radius", "font_size", "label_offset",
        "palette"};
    return keys;
}

ConfigMap parse_config(std::string_view text) {
    ConfigMap cfg;
    const auto& keys = config_keys();
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(ln) + ": expected key=value");
        }
        auto key = trim(body.substr(0, eq));
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw UsageError("config line " + std::to_string(ln) + ": unknown key '" + key + "'");
        }
        cfg[key] = trim(body.substr(eq + 1));
    }
    return cfg;
}

Outputs run(const ConfigMap& cfg, const fs::path& base_dir, std::ostream& log) {
    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    IngestOptions in;
    in.ontology = resolve(config_required(cfg, "ontology"));
    in.categories = resolve(config_required(cfg, "categories"));
    in.out_dir = resolve(config_required(cfg, "out_dir"));
    in.strict = config_bool(cfg, "strict");
    if (auto it = cfg.find("data"); it != cfg.end()) {
        for (const auto& p : split_list(it->second)) in.csv_inputs.push_back(resolve(p));
    }
    if (auto it = cfg.find("orphadata"); it != cfg.end()) {
        for (const auto& item : split_list(it->second)) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw UsageError("config key 'orphadata': expected LABEL=PATH items");
            in.xml_inputs.push_back({item.substr(0, eq), resolve(item.substr(eq + 1))});
        }
    }
    if (in.csv_inputs.empty() && in.xml_inputs.empty()) throw UsageError("missing config key: data");

    EmbeddingConfig ec;
    ec.perplexity = config_number(cfg, "perplexity", ec.perplexity);
    ec.iterations = config_number(cfg, "iterations", ec.iterations);
    ec.learning_rate = config_number(cfg, "learning_rate", ec.learning_rate);
    ec.exaggeration_factor = config_number(cfg, "exaggeration_factor", ec.exaggeration_factor);
    ec.exaggeration_iters = config_number(cfg, "exaggeration_iters", ec.exaggeration_iters);
    ec.momentum_early = config_number(cfg, "momentum_early", ec.momentum_early);
    ec.momentum_late = config_number(cfg, "momentum_late", ec.momentum_late);
    ec.momentum_switch_iter = config_number(cfg, "momentum_switch_iter", ec.momentum_switch_iter);
    ec.seed = config_number(cfg, "seed", ec.seed);
    ec.perplexity_tolerance = config_number(cfg, "perplexity_tolerance", ec.perplexity_tolerance);
    ec.calibration_max_iters = config_number(cfg, "calibration_max_iters", ec.calibration_max_iters);

    ImportanceOptions imp;
    imp.permutations = config_number(cfg, "permutations", imp.permutations);
    imp.seed = ec.seed;
    imp.top_k = config_number(cfg, "top_k", imp.top_k);
    if (imp.top_k < 1) throw UsageError("config key 'top_k': must be at least 1");
    if (auto it = cfg.find("aggregation"); it != cfg.end()) {
        if (it->second == "max") {
            imp.aggregation = Aggregation::kMax;
        } else if (it->second == "sum") {
            imp.aggregation = Aggregation::kSum;
        } else {
            throw UsageError("config key 'aggregation': expected max or sum");
        }
    }

    PlotSpec spec;
    spec.width = config_number(cfg, "width", spec.width);
    spec.height = config_number(cfg, "height", spec.height);
    spec.margin = config_number(cfg, "margin", spec.margin);
    spec.marker_radius = config_number(cfg, "marker_radius", spec.marker_radius);
    spec.centroid_marker_radius = config_number(cfg, "centroid_marker_radius", spec.centroid_marker_radius);
    spec.font_size = config_number(cfg, "font_size", spec.font_size);
    spec.label_offset = config_number(cfg, "label_offset", spec.label_offset);
    if (auto it = cfg.find("palette"); it != cfg.end()) spec.palette = split_list(it->second);
    spec.layers = parse_layers(cfg.count("layers") ? cfg.at("layers")
                                                   : "markers,class_colors,class_centroids,feature_centroids");
    spec.validate();

    const fs::path& dir = in.out_dir;
    Outputs all;
    auto keep = [&](Outputs more) { all.insert(all.end(), more.begin(), more.end()); };

    keep(ingest(in, log));
    keep(embed({dir / kMatrixFile, dir, ec}, log));
    keep(centroids({dir / kMatrixFile, dir / kCoordsFile, dir}, log));
    imp.matrix = dir / kMatrixFile;
    imp.out_dir = dir;
    {
        const auto matrix = read_matrix_csv(read_file(imp.matrix));
        if (imp.top_k > matrix.cols()) {
            throw UsageError("top_k " + std::to_string(imp.top_k) + " exceeds the " +
                             std::to_string(matrix.cols()) + " features");
        }
    }
    keep(importance(imp, log));

    PlotOptions scatter;
    scatter.kind = PlotKind::kScatter;
    scatter.coords = dir / kCoordsFile;
    scatter.matrix = dir / kMatrixFile;
    scatter.centroids = dir / kCentroidsFile;
    scatter.importance = dir / kImportanceFile;
    scatter.top_k = imp.top_k;
    scatter.out = dir / kScatterFile;
    scatter.spec = spec;
    keep(plot(scatter, log));

    PlotOptions bars = scatter;
    bars.kind = PlotKind::kBars;
    bars.out = dir / kBarsFile;
    keep(plot(bars, log));

    PlotOptions ranked = scatter;
    ranked.kind = PlotKind::kImportance;
    ranked.out = dir / kImportanceBarsFile;
    keep(plot(ranked, log));

    std::string manifest;
    for (const auto& path : all) {
        manifest += fs::relative(path, dir).generic_string() + "\t" + sha256_hex(read_file(path)) + "\n";
    }
    all.push_back(emit(dir, kManifestFile, manifest));
    log << "run: wrote " << all.size() << " files to " << dir.string() << '\n';
    return all;
}

}  // namespace phenomap::pipeline
