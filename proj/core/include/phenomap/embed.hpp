#ifndef PHENOMAP_EMBED_HPP
#define PHENOMAP_EMBED_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phenomap/dataset.hpp"
#include "phenomap/error.hpp"

namespace phenomap {

/**
 * Exact t-SNE parameters. Only perplexity and the euclidean metric are fixed
 * by the method; the optimizer schedule follows the usual reference defaults.
 */
struct EmbeddingConfig {
    double perplexity = 50.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double exaggeration_factor = 12.0;
    int exaggeration_iters = 250;
    double momentum_early = 0.5;
    double momentum_late = 0.8;
    int momentum_switch_iter = 250;
    std::uint64_t seed = 42;
    double perplexity_tolerance = 1e-5;
    int calibration_max_iters = 50;

    /// Throws UsageError when a field is out of range for `n` observations.
    void validate(std::size_t n) const;
};

/// Dense row-major n x n matrix of doubles.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }
    std::span<const double> values() const { return values_; }

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

struct Embedding {
    std::vector<Point> coords;
    std::vector<RowLabel> row_labels;
    std::vector<double> loss_trace;  // KL after iteration k at index k - 1
    Warnings warnings;
};

/// Squared euclidean distances between rows; equals the Hamming distance on
/// binary rows. Throws UsageError when fewer than two rows are given.
SquareMatrix pairwise_sq_distances(const PhenotypeMatrix& matrix);
SquareMatrix pairwise_sq_distances(std::span<const double> data, std::size_t rows, std::size_t cols);

struct Calibration {
    double beta = 0.0;           // Gaussian precision applied to squared distances
    std::vector<double> p;       // conditional neighbour probabilities, sums to 1
    double perplexity = 0.0;     // achieved 2^H, H in bits
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;     // all distances equal and target unreachable
};

/// Finds beta so that p_j ~ exp(-beta d_j) has perplexity within `tolerance`
/// of the target, by bracket expansion then bisection. When the iteration
/// budget runs out the closest candidate is returned with converged = false.
Calibration calibrate_conditional(std::span<const double> distances, double perplexity,
                                  double tolerance, int max_iters);

/// Symmetrised joint affinities p_ij = (p_j|i + p_i|j) / 2N.
SquareMatrix joint_affinities(const SquareMatrix& distances, const EmbeddingConfig& config,
                              Warnings* warnings = nullptr);

/// Probability floor applied inside the KL logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

/// KL(P || Q) for the Student-t similarities of `coords`.
double kl_divergence(const SquareMatrix& p, std::span<const Point> coords);

/// Analytic gradient of `kl_divergence` with respect to `coords`.
std::vector<Point> kl_gradient(const SquareMatrix& p, std::span<const Point> coords);

/// Full exact t-SNE on the rows of `matrix`. Deterministic for a fixed
/// config. Throws NumericalError if the loss stops being finite.
Embedding run_tsne(const PhenotypeMatrix& matrix, const EmbeddingConfig& config);

/// Same optimizer on precomputed distances; `labels` may be empty.
Embedding run_tsne(const SquareMatrix& distances, std::vector<RowLabel> labels,
                   const EmbeddingConfig& config);

/// `variant,x,y` with round-trip exact decimals.
std::string write_coords_csv(const Embedding& embedding);

struct LabeledPoint {
    std::string variant;
    Point point;
};
std::vector<LabeledPoint> read_coords_csv(std::string_view text);

/// `iter,kl` starting at iteration 1.
std::string write_loss_csv(const Embedding& embedding);

}  // namespace phenomap

#endif
