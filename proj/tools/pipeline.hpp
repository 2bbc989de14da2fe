#ifndef PHENOMAP_TOOLS_PIPELINE_HPP
#define PHENOMAP_TOOLS_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "phenomap/embed.hpp"
#include "phenomap/importance.hpp"
#include "phenomap/render.hpp"

namespace phenomap::pipeline {

namespace fs = std::filesystem;

// Output file names shared by the stage commands and `run`.
inline constexpr const char* kMatrixFile = "matrix.csv";
inline constexpr const char* kFrequencyFile = "frequencies.csv";
inline constexpr const char* kIngestReportFile = "ingest_report.csv";
inline constexpr const char* kCoordsFile = "coords.csv";
inline constexpr const char* kLossFile = "loss.csv";
inline constexpr const char* kCentroidsFile = "centroids.csv";
inline constexpr const char* kImportanceFile = "importance.csv";
inline constexpr const char* kScatterFile = "scatter.svg";
inline constexpr const char* kBarsFile = "phenotype_bars.svg";
inline constexpr const char* kImportanceBarsFile = "importance_bars.svg";
inline constexpr const char* kManifestFile = "manifest.tsv";

struct OrphadataInput {
    std::string class_label;
    fs::path path;
};

struct IngestOptions {
    fs::path ontology;
    fs::path categories;
    std::vector<fs::path> csv_inputs;
    std::vector<OrphadataInput> xml_inputs;
    fs::path out_dir;
    bool strict = false;
};

struct EmbedOptions {
    fs::path matrix;
    fs::path out_dir;
    EmbeddingConfig config;
};

struct CentroidOptions {
    fs::path matrix;
    fs::path coords;
    fs::path out_dir;
};

struct ImportanceOptions {
    fs::path matrix;
    fs::path out_dir;
    std::size_t permutations = 200;
    std::uint64_t seed = 42;
    std::size_t top_k = 10;
    Aggregation aggregation = Aggregation::kMax;
};

enum class PlotKind { kScatter, kBars, kImportance };

struct PlotOptions {
    PlotKind kind = PlotKind::kScatter;
    fs::path coords;
    fs::path matrix;
    fs::path centroids;
    fs::path importance;
    std::size_t top_k = 10;
    fs::path out;
    PlotSpec spec;
};

/// Files written by a stage, relative paths resolved against its out_dir.
using Outputs = std::vector<fs::path>;

Outputs ingest(const IngestOptions& opt, std::ostream& log);
Outputs embed(const EmbedOptions& opt, std::ostream& log);
Outputs centroids(const CentroidOptions& opt, std::ostream& log);
Outputs importance(const ImportanceOptions& opt, std::ostream& log);
Outputs plot(const PlotOptions& opt, std::ostream& log);

/// Flat key=value configuration; `#` starts a comment line.
using ConfigMap = std::map<std::string, std::string>;

/// Every key `run` understands, in documentation order.
const std::vector<std::string>& config_keys();

ConfigMap parse_config(std::string_view text);

/// Runs every stage into the configured output directory and writes the
/// manifest. `base_dir` resolves relative paths from the config file.
Outputs run(const ConfigMap& config, const fs::path& base_dir, std::ostream& log);

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

}  // namespace phenomap::pipeline

#endif
