#include "cli.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "phenomap/error.hpp"
#include "pipeline.hpp"

namespace phenomap::cli {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        if (comma > start) out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

void add_embedding_flags(CLI::App& cmd, EmbeddingConfig& c) {
    cmd.add_option("--perplexity", c.perplexity, "Target perplexity")->capture_default_str();
    cmd.add_option("--iterations", c.iterations, "Gradient descent iterations")->capture_default_str();
    cmd.add_option("--learning-rate", c.learning_rate)->capture_default_str();
    cmd.add_option("--exaggeration", c.exaggeration_factor, "Early exaggeration factor")->capture_default_str();
    cmd.add_option("--exaggeration-iters", c.exaggeration_iters)->capture_default_str();
    cmd.add_option("--momentum-early", c.momentum_early)->capture_default_str();
    cmd.add_option("--momentum-late", c.momentum_late)->capture_default_str();
    cmd.add_option("--momentum-switch", c.momentum_switch_iter)->capture_default_str();
    cmd.add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd.add_option("--perplexity-tol", c.perplexity_tolerance)->capture_default_str();
    cmd.add_option("--calibration-iters", c.calibration_max_iters)->capture_default_str();
}

struct PlotFlags {
    std::string layers = "markers";
    std::string palette;
    std::string kind = "scatter";
};

void add_plot_flags(CLI::App& cmd, PlotSpec& spec, PlotFlags& flags) {
    cmd.add_option("--layers", flags.layers,
                   "Comma list of markers,class_colors,class_centroids,feature_centroids")
        ->capture_default_str();
    cmd.add_option("--width", spec.width)->capture_default_str();
    cmd.add_option("--height", spec.height)->capture_default_str();
    cmd.add_option("--margin", spec.margin)->capture_default_str();
    cmd.add_option("--marker-radius", spec.marker_radius)->capture_default_str();
    cmd.add_option("--centroid-marker-radius", spec.centroid_marker_radius)->capture_default_str();
    cmd.add_option("--font-size", spec.font_size)->capture_default_str();
    cmd.add_option("--label-offset", spec.label_offset)->capture_default_str();
    cmd.add_option("--palette", flags.palette, "Comma list of colours");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ontology-coded observations to annotated t-SNE scatter plots"};
    app.name(args.empty() ? "phenomap" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);

    pipeline::IngestOptions ingest;
    std::vector<std::string> xml_inputs;
    auto* cmd_ingest = app.add_subcommand("ingest", "Reduce term-coded records to the binary feature matrix");
    cmd_ingest->add_option("--ontology", ingest.ontology, "OBO ontology file")->required();
    cmd_ingest->add_option("--categories", ingest.categories, "Category term list")->required();
    cmd_ingest->add_option("--data", ingest.csv_inputs, "class,variant,terms CSV (repeatable)");
    cmd_ingest->add_option("--orphadata", xml_inputs, "LABEL=PATH Orphadata XML (repeatable)");
    cmd_ingest->add_option("--out-dir", ingest.out_dir, "Output directory")->required();
    cmd_ingest->add_flag("--strict", ingest.strict, "Fail on terms missing from the ontology");

    pipeline::EmbedOptions embed;
    auto* cmd_embed = app.add_subcommand("embed", "Exact t-SNE of the matrix rows");
    cmd_embed->add_option("--matrix", embed.matrix)->required();
    cmd_embed->add_option("--out-dir", embed.out_dir)->required();
    add_embedding_flags(*cmd_embed, embed.config);

    pipeline::CentroidOptions centroid;
    auto* cmd_centroids = app.add_subcommand("centroids", "Class and feature centroids of the embedding");
    cmd_centroids->add_option("--matrix", centroid.matrix)->required();
    cmd_centroids->add_option("--coords", centroid.coords)->required();
    cmd_centroids->add_option("--out-dir", centroid.out_dir)->required();

    pipeline::ImportanceOptions importance;
    std::string aggregate = "max";
    auto* cmd_importance = app.add_subcommand("importance", "Shapley feature ranking");
    cmd_importance->add_option("--matrix", importance.matrix)->required();
    cmd_importance->add_option("--out-dir", importance.out_dir)->required();
    cmd_importance->add_option("--permutations", importance.permutations, "Permutations per row when sampling")
        ->capture_default_str();
    cmd_importance->add_option("--seed", importance.seed)->capture_default_str();
    cmd_importance->add_option("--top-k", importance.top_k)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_importance->add_option("--aggregate", aggregate, "Per-feature score across classes")
        ->check(CLI::IsMember({"max", "sum"}))
        ->capture_default_str();

    pipeline::PlotOptions plot;
    PlotFlags plot_flags;
    auto* cmd_plot = app.add_subcommand("plot", "Render an SVG figure");
    cmd_plot->add_option("--kind", plot_flags.kind, "scatter, bars or importance")
        ->check(CLI::IsMember({"scatter", "bars", "importance"}))
        ->capture_default_str();
    cmd_plot->add_option("--coords", plot.coords);
    cmd_plot->add_option("--matrix", plot.matrix);
    cmd_plot->add_option("--centroids", plot.centroids);
    cmd_plot->add_option("--importance", plot.importance, "Ranks feature centroids / importance bars");
    cmd_plot->add_option("--top-k", plot.top_k)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_plot->add_option("--out", plot.out, "SVG output path")->required();
    add_plot_flags(*cmd_plot, plot.spec, plot_flags);

    std::string config_path;
    std::map<std::string, std::string> overrides;
    auto* cmd_run = app.add_subcommand("run", "Run every stage from a key=value config file");
    cmd_run->add_option("--config", config_path, "Configuration file")->required();
    for (const auto& key : pipeline::config_keys()) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        cmd_run->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides[key] = v; },
            "Override config key " + key);
    }

    std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv_tail.begin(), argv_tail.end());
    try {
        app.parse(argv_tail);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (cmd_ingest->parsed()) {
            for (const auto& item : xml_inputs) {
                const auto eq = item.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw UsageError("--orphadata expects LABEL=PATH, got '" + item + "'");
                }
                ingest.xml_inputs.push_back({item.substr(0, eq), item.substr(eq + 1)});
            }
            pipeline::ingest(ingest, out);
        } else if (cmd_embed->parsed()) {
            pipeline::embed(embed, out);
        } else if (cmd_centroids->parsed()) {
            pipeline::centroids(centroid, out);
        } else if (cmd_importance->parsed()) {
            importance.aggregation = aggregate == "sum" ? Aggregation::kSum : Aggregation::kMax;
            pipeline::importance(importance, out);
        } else if (cmd_plot->parsed()) {
            plot.kind = plot_flags.kind == "bars"         ? pipeline::PlotKind::kBars
                        : plot_flags.kind == "importance" ? pipeline::PlotKind::kImportance
                                                          : pipeline::PlotKind::kScatter;
            plot.spec.layers = parse_layers(plot_flags.layers);
            if (!plot_flags.palette.empty()) plot.spec.palette = split_commas(plot_flags.palette);
            pipeline::plot(plot, out);
        } else if (cmd_run->parsed()) {
            auto config = pipeline::parse_config(pipeline::read_file(config_path));
            for (const auto& [k, v] : overrides) config[k] = v;
            const auto base = fs::path(config_path).parent_path();
            pipeline::run(config, base, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    }
    return kSuccess;
}

}  // namespace phenomap::cli
