#include "phenomap/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

#include "phenomap/csv.hpp"

namespace phenomap {

namespace {

struct KernelEval {
    double entropy_bits = 0.0;
    std::vector<double> p;
};

// Distances are shifted by their minimum so the largest weight is exp(0).
KernelEval evaluate_kernel(std::span<const double> shifted, double beta) {
    KernelEval out;
    out.p.resize(shifted.size());
    double z = 0.0;
    for (std::size_t j = 0; j < shifted.size(); ++j) {
        out.p[j] = std::exp(-beta * shifted[j]);
        z += out.p[j];
    }
    double weighted = 0.0;
    for (std::size_t j = 0; j < shifted.size(); ++j) {
        out.p[j] /= z;
        weighted += out.p[j] * shifted[j];
    }
    out.entropy_bits = (std::log(z) + beta * weighted) / std::log(2.0);
    return out;
}

void check_finite(std::span<const Point> coords) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (!std::isfinite(coords[i].x) || !std::isfinite(coords[i].y)) {
            throw NumericalError("non-finite coordinate at row " + std::to_string(i));
        }
    }
}

// Student-t weights w_ij = 1 / (1 + |y_i - y_j|^2) and their off-diagonal sum.
double student_weights(std::span<const Point> y, SquareMatrix& w) {
    const std::size_t n = y.size();
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w(i, i) = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = y[i].x - y[j].x;
            const double dy = y[i].y - y[j].y;
            const double v = 1.0 / (1.0 + dx * dx + dy * dy);
            w(i, j) = v;
            w(j, i) = v;
            z += 2.0 * v;
        }
    }
    return z;
}

std::vector<Point> gradient_scaled(const SquareMatrix& p, double p_scale, std::span<const Point> y,
                                   SquareMatrix& w) {
    const std::size_t n = y.size();
    const double z = student_weights(y, w);
    std::vector<Point> grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        double gx = 0.0;
        double gy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double coeff = (p_scale * p(i, j) - w(i, j) / z) * w(i, j);
            gx += coeff * (y[i].x - y[j].x);
            gy += coeff * (y[i].y - y[j].y);
        }
        grad[i] = {4.0 * gx, 4.0 * gy};
    }
    return grad;
}

void check_p(const SquareMatrix& p, std::span<const Point> coords) {
    if (p.size() != coords.size()) {
        throw UsageError("affinity matrix size " + std::to_string(p.size()) +
                         " does not match " + std::to_string(coords.size()) + " coordinates");
    }
    check_finite(coords);
}

}  // namespace

void EmbeddingConfig::validate(std::size_t n) const {
    if (!(perplexity > 0.0)) throw UsageError("perplexity must be positive");
    if (n < 4) throw UsageError("t-SNE needs at least 4 observations, got " + std::to_string(n));
    if (!(perplexity < static_cast<double>(n) - 1.0)) {
        throw UsageError("perplexity " + csv::format_double(perplexity) +
                         " must be below N - 1 = " + std::to_string(n - 1));
    }
    if (iterations < 1) throw UsageError("iterations must be positive");
    if (!(learning_rate > 0.0)) throw UsageError("learning rate must be positive");
    if (!(exaggeration_factor >= 1.0)) throw UsageError("exaggeration factor must be >= 1");
    if (exaggeration_iters < 0 || exaggeration_iters > iterations) {
        throw UsageError("exaggeration iterations must lie in [0, iterations]");
    }
    if (momentum_early < 0.0 || momentum_early >= 1.0 || momentum_late < 0.0 || momentum_late >= 1.0) {
        throw UsageError("momentum values must lie in [0, 1)");
    }
    if (momentum_switch_iter < 0) throw UsageError("momentum switch iteration must be >= 0");
    if (!(perplexity_tolerance > 0.0)) throw UsageError("perplexity tolerance must be positive");
    if (calibration_max_iters < 1) throw UsageError("calibration iterations must be positive");
}

SquareMatrix pairwise_sq_distances(std::span<const double> data, std::size_t rows, std::size_t cols) {
    if (rows < 2) throw UsageError("pairwise distances need at least 2 rows");
    if (data.size() != rows * cols) throw UsageError("data size does not match rows x cols");
    SquareMatrix d(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = i + 1; j < rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < cols; ++k) {
                const double diff = data[i * cols + k] - data[j * cols + k];
                s += diff * diff;
            }
            d(i, j) = s;
            d(j, i) = s;
        }
    }
    return d;
}

SquareMatrix pairwise_sq_distances(const PhenotypeMatrix& matrix) {
    std::vector<double> data(matrix.cells().begin(), matrix.cells().end());
    return pairwise_sq_distances(data, matrix.rows(), matrix.cols());
}

Calibration calibrate_conditional(std::span<const double> distances, double perplexity,
                                  double tolerance, int max_iters) {
    if (distances.empty()) throw UsageError("calibration needs at least one neighbour");
    if (!(perplexity > 0.0)) throw UsageError("perplexity must be positive");
    const double count = static_cast<double>(distances.size());
    if (perplexity > count) {
        throw UsageError("perplexity " + csv::format_double(perplexity) + " exceeds the " +
                         std::to_string(distances.size()) + " available neighbours");
    }

    const double dmin = *std::min_element(distances.begin(), distances.end());
    const double dmax = *std::max_element(distances.begin(), distances.end());
    Calibration out;
    if (dmax == dmin) {
        // Every beta yields the uniform distribution.
        out.beta = 1.0;
        out.p.assign(distances.size(), 1.0 / count);
        out.perplexity = count;
        out.converged = std::abs(count - perplexity) <= tolerance;
        out.degenerate = !out.converged;
        return out;
    }

    std::vector<double> shifted(distances.size());
    for (std::size_t j = 0; j < distances.size(); ++j) shifted[j] = distances[j] - dmin;

    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double best_gap = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iters; ++it) {
        auto eval = evaluate_kernel(shifted, beta);
        const double achieved = std::exp2(eval.entropy_bits);
        const double gap = std::abs(achieved - perplexity);
        out.iterations = it;
        if (gap < best_gap) {
            best_gap = gap;
            out.beta = beta;
            out.p = std::move(eval.p);
            out.perplexity = achieved;
        }
        if (gap <= tolerance) {
            out.converged = true;
            break;
        }
        if (achieved > perplexity) {
            lo = beta;
            beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (lo + hi);
        } else {
            hi = beta;
            beta = 0.5 * (lo + hi);
        }
    }
    return out;
}

SquareMatrix joint_affinities(const SquareMatrix& distances, const EmbeddingConfig& config,
                              Warnings* warnings) {
    const std::size_t n = distances.size();
    if (n < 2) throw UsageError("joint affinities need at least 2 points");
    SquareMatrix cond(n);
    std::vector<double> row(n - 1);
    std::size_t unconverged = 0;
    std::size_t degenerate = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0, k = 0; j < n; ++j) {
            if (j != i) row[k++] = distances(i, j);
        }
        const auto cal = calibrate_conditional(row, config.perplexity, config.perplexity_tolerance,
                                               config.calibration_max_iters);
        if (cal.degenerate) {
            ++degenerate;
        } else if (!cal.converged) {
            ++unconverged;
        }
        for (std::size_t j = 0, k = 0; j < n; ++j) {
            if (j != i) cond(i, j) = cal.p[k++];
        }
    }
    if (warnings && degenerate > 0) {
        warnings->push_back(std::to_string(degenerate) +
                            " rows have all-equal distances; using uniform neighbour probabilities");
    }
    if (warnings && unconverged > 0) {
        warnings->push_back(std::to_string(unconverged) +
                            " rows did not reach the perplexity tolerance; using the closest bandwidth");
    }

    SquareMatrix p(n);
    const double denom = 2.0 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (cond(i, j) + cond(j, i)) / denom;
            p(i, j) = v;
            p(j, i) = v;
        }
    }
    return p;
}

double kl_divergence(const SquareMatrix& p, std::span<const Point> coords) {
    check_p(p, coords);
    const std::size_t n = coords.size();
    SquareMatrix w(n);
    const double z = student_weights(coords, w);
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pij = std::max(p(i, j), kProbabilityFloor);
            const double qij = std::max(w(i, j) / z, kProbabilityFloor);
            kl += pij * std::log(pij / qij);
        }
    }
    return kl;
}

std::vector<Point> kl_gradient(const SquareMatrix& p, std::span<const Point> coords) {
    check_p(p, coords);
    SquareMatrix w(coords.size());
    return gradient_scaled(p, 1.0, coords, w);
}

Embedding run_tsne(const SquareMatrix& distances, std::vector<RowLabel> labels,
                   const EmbeddingConfig& config) {
    const std::size_t n = distances.size();
    config.validate(n);
    if (!labels.empty() && labels.size() != n) throw UsageError("label count does not match distances");

    Embedding out;
    out.row_labels = std::move(labels);
    if (config.perplexity > (static_cast<double>(n) - 1.0) / 3.0) {
        out.warnings.push_back("perplexity " + csv::format_double(config.perplexity) +
                               " exceeds (N - 1) / 3 = " +
                               csv::format_double((static_cast<double>(n) - 1.0) / 3.0));
    }
    const SquareMatrix p = joint_affinities(distances, config, &out.warnings);

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> init(0.0, 1e-4);
    std::vector<Point> y(n);
    for (auto& pt : y) {
        pt.x = init(rng);
        pt.y = init(rng);
    }

    std::vector<Point> velocity(n);
    std::vector<Point> gains(n, Point{1.0, 1.0});
    SquareMatrix w(n);
    out.loss_trace.reserve(static_cast<std::size_t>(config.iterations));

    auto gain_step = [](double gain, double grad, double vel) {
        const bool same_sign = (grad > 0.0) == (vel > 0.0);
        return std::max(same_sign ? gain * 0.8 : gain + 0.2, 0.01);
    };

    for (int it = 1; it <= config.iterations; ++it) {
        const double scale = it <= config.exaggeration_iters ? config.exaggeration_factor : 1.0;
        const double momentum = it <= config.momentum_switch_iter ? config.momentum_early
                                                                  : config.momentum_late;
        const auto grad = gradient_scaled(p, scale, y, w);

        if (it % 100 == 0) {
            double sx = 0.0, sy = 0.0, mag = 0.0;
            for (const auto& g : grad) {
                sx += g.x;
                sy += g.y;
                mag += std::abs(g.x) + std::abs(g.y);
            }
            if (std::abs(sx) + std::abs(sy) > 1e-9 * mag + 1e-300) {
                throw NumericalError("gradient rows do not sum to zero at iteration " +
                                     std::to_string(it));
            }
        }

        double mean_x = 0.0, mean_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gains[i].x = gain_step(gains[i].x, grad[i].x, velocity[i].x);
            gains[i].y = gain_step(gains[i].y, grad[i].y, velocity[i].y);
            velocity[i].x = momentum * velocity[i].x - config.learning_rate * gains[i].x * grad[i].x;
            velocity[i].y = momentum * velocity[i].y - config.learning_rate * gains[i].y * grad[i].y;
            y[i].x += velocity[i].x;
            y[i].y += velocity[i].y;
            mean_x += y[i].x;
            mean_y += y[i].y;
        }
        mean_x /= static_cast<double>(n);
        mean_y /= static_cast<double>(n);
        for (auto& pt : y) {
            pt.x -= mean_x;
            pt.y -= mean_y;
        }

        double kl = std::numeric_limits<double>::quiet_NaN();
        bool finite = true;
        for (const auto& pt : y) finite = finite && std::isfinite(pt.x) && std::isfinite(pt.y);
        if (finite) kl = kl_divergence(p, y);
        if (!std::isfinite(kl)) {
            double max_grad = 0.0;
            for (const auto& g : grad) max_grad = std::max({max_grad, std::abs(g.x), std::abs(g.y)});
            throw NumericalError("non-finite loss at iteration " + std::to_string(it) +
                                 " (max |gradient| = " + csv::format_double(max_grad) + ")");
        }
        out.loss_trace.push_back(kl);
    }
    out.coords = std::move(y);
    return out;
}

Embedding run_tsne(const PhenotypeMatrix& matrix, const EmbeddingConfig& config) {
    config.validate(matrix.rows());
    return run_tsne(pairwise_sq_distances(matrix), matrix.row_labels(), config);
}

std::string write_coords_csv(const Embedding& embedding) {
    if (embedding.row_labels.size() != embedding.coords.size()) {
        throw UsageError("embedding labels do not match coordinates");
    }
    std::string out = csv::format_row({"variant", "x", "y"});
    for (std::size_t i = 0; i < embedding.coords.size(); ++i) {
        out += csv::format_row({embedding.row_labels[i].variant,
                                csv::format_double(embedding.coords[i].x),
                                csv::format_double(embedding.coords[i].y)});
    }
    return out;
}

std::vector<LabeledPoint> read_coords_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || rows.front().fields != std::vector<std::string>{"variant", "x", "y"}) {
        throw InputError("line 1: coords header must be exactly variant,x,y");
    }
    std::vector<LabeledPoint> out;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto where = "line " + std::to_string(row.line);
        if (row.fields.size() != 3) throw InputError(where + ": expected 3 fields");
        if (!seen.insert(row.fields[0]).second) {
            throw InputError(where + ": duplicate variant '" + row.fields[0] + "'");
        }
        Point pt{csv::parse_double(row.fields[1], where + " x"), csv::parse_double(row.fields[2], where + " y")};
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) throw InputError(where + ": non-finite coordinate");
        out.push_back({row.fields[0], pt});
    }
    return out;
}

std::string write_loss_csv(const Embedding& embedding) {
    std::string out = csv::format_row({"iter", "kl"});
    for (std::size_t k = 0; k < embedding.loss_trace.size(); ++k) {
        out += std::to_string(k + 1) + "," + csv::format_double(embedding.loss_trace[k]) + "\n";
    }
    return out;
}

}  // namespace phenomap
