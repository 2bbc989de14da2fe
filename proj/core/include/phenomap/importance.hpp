#ifndef PHENOMAP_IMPORTANCE_HPP
#define PHENOMAP_IMPORTANCE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phenomap/dataset.hpp"

namespace phenomap {

/**
 * Nearest-centroid classifier over the binary feature space. It defines the
 * coalition game that Shapley attribution explains: features outside a
 * coalition are replaced by their dataset-wide mean, each class scores the
 * negative squared distance to its centroid, and a softmax turns the scores
 * into class probabilities.
 */
struct SurrogateModel {
    std::vector<std::string> classes;
    std::vector<double> class_means;   // classes x features, row-major, in [0, 1]
    std::vector<double> global_means;  // one per feature

    std::size_t num_classes() const { return classes.size(); }
    std::size_t num_features() const { return global_means.size(); }
    double class_mean(std::size_t c, std::size_t j) const { return class_means[c * num_features() + j]; }
};

/// Per-class and overall column means. Throws UsageError for fewer than two classes.
SurrogateModel fit_surrogate(const PhenotypeMatrix& matrix);

/// Class probabilities when only the features in `coalition` keep their
/// observed values.
std::vector<double> predict_proba(const SurrogateModel& model,
                                  std::span<const std::uint8_t> observation,
                                  std::span<const std::size_t> coalition);

/// Largest feature count accepted by exact enumeration.
inline constexpr std::size_t kMaxExactFeatures = 20;

/// Exact Shapley values of v(S) = predict_proba(S)[class_index] by full
/// subset enumeration. Throws UsageError when d > kMaxExactFeatures.
std::vector<double> shapley_exact(const SurrogateModel& model,
                                  std::span<const std::uint8_t> observation, std::size_t class_index);

/// Monte-Carlo permutation estimate of the same values, seeded.
std::vector<double> shapley_sampled(const SurrogateModel& model,
                                    std::span<const std::uint8_t> observation,
                                    std::size_t class_index, std::size_t num_permutations,
                                    std::uint64_t seed);

/// Attributions for every class at once: result[c][j]. The single-class
/// functions above return one row of these.
std::vector<std::vector<double>> shapley_exact_all(const SurrogateModel& model,
                                                   std::span<const std::uint8_t> observation);
std::vector<std::vector<double>> shapley_sampled_all(const SurrogateModel& model,
                                                     std::span<const std::uint8_t> observation,
                                                     std::size_t num_permutations,
                                                     std::uint64_t seed);

enum class Aggregation { kMax, kSum };

struct ImportanceReport {
    std::vector<std::string> features;
    std::vector<std::string> classes;
    std::vector<double> mean_abs;   // features x classes, row-major
    std::vector<double> overall;    // per feature
    std::vector<std::size_t> ranking;  // feature indices, best first
    std::vector<std::string> top;   // first top_k labels of the ranking
    bool exact = false;

    double score(std::size_t f, std::size_t c) const { return mean_abs[f * classes.size() + c]; }
};

/// Mean |attribution| per (feature, class) over all rows, exact when
/// d <= kMaxExactFeatures and sampled otherwise. Row i samples with
/// seed ^ i, so the report does not depend on evaluation order.
ImportanceReport rank_features(const PhenotypeMatrix& matrix, const SurrogateModel& model,
                               std::size_t num_permutations, std::uint64_t seed, std::size_t top_k,
                               Aggregation aggregation = Aggregation::kMax);

/// `feature,<class...>,overall`, rows in ranking order.
std::string write_importance_csv(const ImportanceReport& report);

/// Reads the CSV back; features keep file order, which is the ranking.
ImportanceReport read_importance_csv(std::string_view text);

}  // namespace phenomap

#endif
