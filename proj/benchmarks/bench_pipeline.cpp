#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "phenomap/embed.hpp"
#include "phenomap/importance.hpp"
#include "phenomap/ontology.hpp"

using namespace phenomap;

namespace {

PhenotypeMatrix random_matrix(std::size_t n, std::size_t d, std::size_t classes, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::bernoulli_distribution coin(0.3);
    std::vector<RowLabel> rows;
    std::vector<std::uint8_t> cells;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({"c" + std::to_string(i % classes), "v" + std::to_string(i)});
        for (std::size_t j = 0; j < d; ++j) cells.push_back(coin(rng));
    }
    std::vector<std::string> features;
    for (std::size_t j = 0; j < d; ++j) features.push_back("f" + std::to_string(j));
    return PhenotypeMatrix(std::move(rows), std::move(features), std::move(cells));
}

// 235 observations x 31 features, 3 classes.
void BM_Tsne(benchmark::State& state) {
    const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 31, 3, 1);
    EmbeddingConfig cfg;
    cfg.perplexity = 30;
    for (auto _ : state) benchmark::DoNotOptimize(run_tsne(m, cfg));
}
BENCHMARK(BM_Tsne)->Arg(60)->Arg(235)->Unit(benchmark::kMillisecond);

void BM_JointAffinities(benchmark::State& state) {
    const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 31, 3, 2);
    const auto d = pairwise_sq_distances(m);
    EmbeddingConfig cfg;
    cfg.perplexity = 30;
    for (auto _ : state) benchmark::DoNotOptimize(joint_affinities(d, cfg));
}
BENCHMARK(BM_JointAffinities)->Arg(235)->Unit(benchmark::kMillisecond);

void BM_ShapleyExactAll(benchmark::State& state) {
    const auto m = random_matrix(60, static_cast<std::size_t>(state.range(0)), 3, 3);
    const auto model = fit_surrogate(m);
    for (auto _ : state) benchmark::DoNotOptimize(shapley_exact_all(model, m.row(0)));
}
BENCHMARK(BM_ShapleyExactAll)->DenseRange(8, 16, 4)->Unit(benchmark::kMicrosecond);

void BM_ShapleySampledAll(benchmark::State& state) {
    const auto m = random_matrix(60, 31, 3, 4);
    const auto model = fit_surrogate(m);
    const auto perms = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(shapley_sampled_all(model, m.row(0), perms, 7));
}
BENCHMARK(BM_ShapleySampledAll)->Arg(200)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_RankFeatures(benchmark::State& state) {
    const auto m = random_matrix(235, 31, 3, 5);
    const auto model = fit_surrogate(m);
    for (auto _ : state) benchmark::DoNotOptimize(rank_features(m, model, 200, 42, 10));
}
BENCHMARK(BM_RankFeatures)->Unit(benchmark::kMillisecond);

// Layered random DAG, each term with up to three parents in the previous layer.
void BM_Subsume(benchmark::State& state) {
    const std::size_t layers = 8, width = static_cast<std::size_t>(state.range(0));
    std::mt19937 rng(6);
    std::vector<Term> terms;
    for (std::size_t l = 0; l < layers; ++l) {
        for (std::size_t w = 0; w < width; ++w) {
            Term t{"T:" + std::to_string(l) + "_" + std::to_string(w), "", {}};
            if (l > 0) {
                std::uniform_int_distribution<std::size_t> pick(0, width - 1);
                for (int k = 0; k < 3; ++k) t.parents.push_back("T:" + std::to_string(l - 1) + "_" + std::to_string(pick(rng)));
                std::sort(t.parents.begin(), t.parents.end());
                t.parents.erase(std::unique(t.parents.begin(), t.parents.end()), t.parents.end());
            }
            terms.push_back(std::move(t));
        }
    }
    const auto graph = OntologyGraph::from_terms(terms);
    std::vector<Category> cats;
    for (std::size_t w = 0; w < width; w += width / 16 + 1) cats.push_back({"T:1_" + std::to_string(w), ""});
    const CategorySet set(graph, cats);
    for (auto _ : state) {
        for (std::size_t w = 0; w < width; ++w) {
            benchmark::DoNotOptimize(subsume(graph, set, "T:" + std::to_string(layers - 1) + "_" + std::to_string(w)));
        }
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * width));
}
BENCHMARK(BM_Subsume)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
