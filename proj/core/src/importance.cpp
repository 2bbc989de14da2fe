#include "phenomap/importance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "phenomap/csv.hpp"
#include "phenomap/error.hpp"

namespace phenomap {

namespace {

void softmax_into(std::span<const double> scores, std::span<double> out) {
    const double top = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        out[c] = std::exp(scores[c] - top);
        z += out[c];
    }
    for (auto& v : out) v /= z;
}

// Scores decompose per feature: score_c(S) = base_c + sum_{j in S} delta_cj,
// where delta_cj swaps the imputed value of feature j for the observed one.
struct CoalitionGame {
    std::size_t k = 0;
    std::size_t d = 0;
    std::vector<double> base;   // k
    std::vector<double> delta;  // d x k, row-major

    CoalitionGame(const SurrogateModel& model, std::span<const std::uint8_t> observation)
        : k(model.num_classes()), d(model.num_features()), base(k, 0.0), delta(d * k, 0.0) {
        if (observation.size() != d) {
            throw UsageError("observation has " + std::to_string(observation.size()) +
                             " features, model expects " + std::to_string(d));
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < d; ++j) {
                const double mu = model.class_mean(c, j);
                const double imputed = model.global_means[j] - mu;
                const double observed = static_cast<double>(observation[j]) - mu;
                base[c] -= imputed * imputed;
                delta[j * k + c] = -(observed * observed - imputed * imputed);
            }
        }
    }
};

void check_class(const SurrogateModel& model, std::size_t class_index) {
    if (class_index >= model.num_classes()) {
        throw UsageError("class index " + std::to_string(class_index) + " out of range");
    }
}

}  // namespace

SurrogateModel fit_surrogate(const PhenotypeMatrix& matrix) {
    SurrogateModel model;
    model.classes = matrix.classes();
    if (model.classes.size() < 2) {
        throw UsageError("importance needs at least two classes, found " +
                         std::to_string(model.classes.size()));
    }
    const std::size_t d = matrix.cols();
    const std::size_t k = model.classes.size();
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t c = 0; c < k; ++c) slot[model.classes[c]] = c;

    std::vector<double> sums(k * d, 0.0);
    std::vector<double> totals(d, 0.0);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto c = slot.at(matrix.row_labels()[i].class_label);
        ++sizes[c];
        for (std::size_t j = 0; j < d; ++j) {
            sums[c * d + j] += matrix.at(i, j);
            totals[j] += matrix.at(i, j);
        }
    }
    model.class_means.resize(k * d);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            model.class_means[c * d + j] = sums[c * d + j] / static_cast<double>(sizes[c]);
        }
    }
    model.global_means.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        model.global_means[j] = totals[j] / static_cast<double>(matrix.rows());
    }
    return model;
}

std::vector<double> predict_proba(const SurrogateModel& model,
                                  std::span<const std::uint8_t> observation,
                                  std::span<const std::size_t> coalition) {
    const std::size_t d = model.num_features();
    if (observation.size() != d) throw UsageError("observation length does not match the model");
    std::vector<double> z(model.global_means);
    for (auto j : coalition) {
        if (j >= d) throw UsageError("coalition index " + std::to_string(j) + " out of range");
        z[j] = observation[j];
    }
    std::vector<double> scores(model.num_classes(), 0.0);
    for (std::size_t c = 0; c < scores.size(); ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = z[j] - model.class_mean(c, j);
            s += diff * diff;
        }
        scores[c] = -s;
    }
    std::vector<double> probs(scores.size());
    softmax_into(scores, probs);
    return probs;
}

std::vector<std::vector<double>> shapley_exact_all(const SurrogateModel& model,
                                                   std::span<const std::uint8_t> observation) {
    const std::size_t d = model.num_features();
    if (d > kMaxExactFeatures) {
        throw UsageError("exact Shapley enumeration is limited to " +
                         std::to_string(kMaxExactFeatures) + " features (got " + std::to_string(d) +
                         "); use the sampled estimator");
    }
    const CoalitionGame game(model, observation);
    const std::size_t k = game.k;
    const std::size_t subsets = std::size_t{1} << d;

    // value[mask * k + c]: scores built by adding deltas from the highest set
    // bit down, so a zero delta never changes the rounding of a sum.
    std::vector<double> value(subsets * k);
    std::vector<double> score(subsets * k);
    std::copy(game.base.begin(), game.base.end(), score.begin());
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        const std::size_t low = static_cast<std::size_t>(std::countr_zero(mask));
        const std::size_t rest = mask & (mask - 1);
        for (std::size_t c = 0; c < k; ++c) {
            score[mask * k + c] = score[rest * k + c] + game.delta[low * k + c];
        }
    }
    for (std::size_t mask = 0; mask < subsets; ++mask) {
        softmax_into(std::span<const double>(score.data() + mask * k, k),
                     std::span<double>(value.data() + mask * k, k));
    }

    // weight[s] = s! (d - s - 1)! / d! = 1 / (d * C(d - 1, s))
    std::vector<double> weight(d, 0.0);
    double binom = 1.0;
    for (std::size_t s = 0; s < d; ++s) {
        weight[s] = 1.0 / (static_cast<double>(d) * binom);
        binom = binom * static_cast<double>(d - 1 - s) / static_cast<double>(s + 1);
    }

    std::vector<std::vector<double>> phi(k, std::vector<double>(d, 0.0));
    for (std::size_t mask = 0; mask < subsets; ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        if (size == d) continue;
        const double w = weight[size];
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t bit = std::size_t{1} << j;
            if (mask & bit) continue;
            const double* with = value.data() + (mask | bit) * k;
            const double* without = value.data() + mask * k;
            for (std::size_t c = 0; c < k; ++c) phi[c][j] += w * (with[c] - without[c]);
        }
    }
    return phi;
}

std::vector<double> shapley_exact(const SurrogateModel& model,
                                  std::span<const std::uint8_t> observation, std::size_t class_index) {
    check_class(model, class_index);
    return shapley_exact_all(model, observation)[class_index];
}

std::vector<std::vector<double>> shapley_sampled_all(const SurrogateModel& model,
                                                     std::span<const std::uint8_t> observation,
                                                     std::size_t num_permutations,
                                                     std::uint64_t seed) {
    if (num_permutations < 1) throw UsageError("at least one permutation is required");
    const CoalitionGame game(model, observation);
    const std::size_t k = game.k;
    const std::size_t d = game.d;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(d);
    std::vector<double> score(k), prev(k), next(k);
    std::vector<std::vector<double>> phi(k, std::vector<double>(d, 0.0));
    for (std::size_t p = 0; p < num_permutations; ++p) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        score = game.base;
        softmax_into(score, prev);
        for (auto j : order) {
            for (std::size_t c = 0; c < k; ++c) score[c] += game.delta[j * k + c];
            softmax_into(score, next);
            for (std::size_t c = 0; c < k; ++c) phi[c][j] += next[c] - prev[c];
            std::swap(prev, next);
        }
    }
    const double inv = 1.0 / static_cast<double>(num_permutations);
    for (auto& row : phi) {
        for (auto& v : row) v *= inv;
    }
    return phi;
}

std::vector<double> shapley_sampled(const SurrogateModel& model,
                                    std::span<const std::uint8_t> observation,
                                    std::size_t class_index, std::size_t num_permutations,
                                    std::uint64_t seed) {
    check_class(model, class_index);
    return shapley_sampled_all(model, observation, num_permutations, seed)[class_index];
}

ImportanceReport rank_features(const PhenotypeMatrix& matrix, const SurrogateModel& model,
                               std::size_t num_permutations, std::uint64_t seed, std::size_t top_k,
                               Aggregation aggregation) {
    const std::size_t d = matrix.cols();
    if (d != model.num_features()) throw UsageError("model and matrix disagree on feature count");
    if (top_k > d) {
        throw UsageError("top_k " + std::to_string(top_k) + " exceeds the " + std::to_string(d) +
                         " available features");
    }
    if (matrix.rows() == 0) throw UsageError("importance needs at least one observation");

    ImportanceReport report;
    report.features = matrix.feature_labels();
    report.classes = model.classes;
    report.exact = d <= kMaxExactFeatures;
    const std::size_t k = model.num_classes();
    report.mean_abs.assign(d * k, 0.0);

    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto phi = report.exact
                             ? shapley_exact_all(model, matrix.row(i))
                             : shapley_sampled_all(model, matrix.row(i), num_permutations,
                                                   seed ^ static_cast<std::uint64_t>(i));
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < d; ++j) report.mean_abs[j * k + c] += std::abs(phi[c][j]);
        }
    }
    const double n = static_cast<double>(matrix.rows());
    for (auto& v : report.mean_abs) v /= n;

    report.overall.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t c = 0; c < k; ++c) {
            const double v = report.score(j, c);
            report.overall[j] = aggregation == Aggregation::kMax ? std::max(report.overall[j], v)
                                                                 : report.overall[j] + v;
        }
    }
    report.ranking.resize(d);
    std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [&](std::size_t a, std::size_t b) { return report.overall[a] > report.overall[b]; });
    for (std::size_t r = 0; r < top_k; ++r) report.top.push_back(report.features[report.ranking[r]]);
    return report;
}

std::string write_importance_csv(const ImportanceReport& report) {
    std::vector<std::string> header{"feature"};
    header.insert(header.end(), report.classes.begin(), report.classes.end());
    header.emplace_back("overall");
    std::string out = csv::format_row(header);
    for (auto j : report.ranking) {
        std::vector<std::string> row{report.features[j]};
        for (std::size_t c = 0; c < report.classes.size(); ++c) {
            row.push_back(csv::format_double(report.score(j, c)));
        }
        row.push_back(csv::format_double(report.overall[j]));
        out += csv::format_row(row);
    }
    return out;
}

ImportanceReport read_importance_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw InputError("importance CSV is empty");
    const auto& header = rows.front().fields;
    if (header.size() < 3 || header.front() != "feature" || header.back() != "overall") {
        throw InputError("line 1: importance header must be feature,<classes...>,overall");
    }
    ImportanceReport report;
    report.classes.assign(header.begin() + 1, header.end() - 1);
    const std::size_t k = report.classes.size();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        const auto where = "line " + std::to_string(rows[r].line);
        if (f.size() != k + 2) throw InputError(where + ": expected " + std::to_string(k + 2) + " fields");
        report.features.push_back(f[0]);
        for (std::size_t c = 0; c < k; ++c) report.mean_abs.push_back(csv::parse_double(f[c + 1], where));
        report.overall.push_back(csv::parse_double(f[k + 1], where));
        report.ranking.push_back(r - 1);
    }
    return report;
}

}  // namespace phenomap
