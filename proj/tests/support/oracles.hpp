// Brute-force reference computations for the tests. Nothing here calls into
// the code path it is used to check.
#ifndef PHENOMAP_TESTS_ORACLES_HPP
#define PHENOMAP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "phenomap/dataset.hpp"
#include "phenomap/embed.hpp"
#include "phenomap/importance.hpp"
#include "phenomap/ontology.hpp"

namespace phenomap::testing {

inline std::string data_path(const std::string& rel) { return std::string(PHENOMAP_TEST_DATA) + "/" + rel; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------- ontology

/// Random DAG whose node i only has parents among nodes < i.
struct RandomDag {
    std::vector<std::string> ids;
    std::vector<std::vector<std::size_t>> parents;
};

inline RandomDag random_dag(std::size_t n, std::uint32_t seed, double edge_prob = 0.12) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomDag dag;
    dag.parents.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        dag.ids.push_back("N:" + std::to_string(1000 + i));
        for (std::size_t j = 0; j < i; ++j) {
            if (u(rng) < edge_prob) dag.parents[i].push_back(j);
        }
    }
    return dag;
}

inline OntologyGraph to_graph(const RandomDag& dag) {
    std::vector<Term> terms;
    for (std::size_t i = 0; i < dag.ids.size(); ++i) {
        Term t{dag.ids[i], "node " + std::to_string(i), {}};
        for (auto p : dag.parents[i]) t.parents.push_back(dag.ids[p]);
        terms.push_back(std::move(t));
    }
    return OntologyGraph::from_terms(std::move(terms));
}

/// Floyd-Warshall style closure: reach[i][j] iff j is a strict ancestor of i.
inline std::vector<std::vector<bool>> closure_oracle(const RandomDag& dag) {
    const std::size_t n = dag.ids.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (auto p : dag.parents[i]) reach[i][p] = true;
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!reach[i][k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[k][j]) reach[i][j] = true;
            }
        }
    }
    return reach;
}

/// Hop distances by Bellman-Ford relaxation over the edge list.
inline std::vector<std::size_t> hop_oracle(const RandomDag& dag, std::size_t from) {
    const std::size_t inf = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dist(dag.ids.size(), inf);
    dist[from] = 0;
    for (std::size_t round = 0; round < dag.ids.size(); ++round) {
        for (std::size_t i = 0; i < dag.ids.size(); ++i) {
            if (dist[i] == inf) continue;
            for (auto p : dag.parents[i]) dist[p] = std::min(dist[p], dist[i] + 1);
        }
    }
    return dist;
}

/// Nearest category node (by hops, ties by list order) or nullopt.
inline std::optional<std::size_t> subsume_oracle(const RandomDag& dag, const std::vector<std::size_t>& cats,
                                                 std::size_t term) {
    const auto dist = hop_oracle(dag, term);
    std::optional<std::size_t> best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    for (auto c : cats) {
        if (dist[c] < best_d) {
            best_d = dist[c];
            best = c;
        }
    }
    return best;
}

// ---------------------------------------------------------------- matrices

inline PhenotypeMatrix random_matrix(std::size_t n, std::size_t d, std::size_t classes, std::uint32_t seed,
                                     double density = 0.4) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<RowLabel> rows;
    std::vector<std::uint8_t> cells;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({"class" + std::to_string(i % classes), "v" + std::to_string(i)});
        for (std::size_t j = 0; j < d; ++j) cells.push_back(u(rng) < density ? 1 : 0);
    }
    std::vector<std::string> features;
    for (std::size_t j = 0; j < d; ++j) features.push_back("f" + std::to_string(j));
    return PhenotypeMatrix(std::move(rows), std::move(features), std::move(cells));
}

inline std::vector<Point> random_points(std::size_t n, std::uint32_t seed, double scale = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        p.x = g(rng);
        p.y = g(rng);
    }
    return pts;
}

/// Three classes of `per_class` rows; class c always carries features
/// 3c..3c+2 with probability `signal` and shares 3 noise columns.
inline PhenotypeMatrix three_cluster_matrix(std::size_t per_class, std::uint32_t seed, double signal = 0.8) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t d = 12;
    std::vector<RowLabel> rows;
    std::vector<std::uint8_t> cells;
    const char* names[3] = {"A", "B", "C"};
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t r = 0; r < per_class; ++r) {
            rows.push_back({names[c], std::string(names[c]) + std::to_string(r)});
            std::vector<std::uint8_t> row(d, 0);
            bool any = false;
            for (std::size_t k = 0; k < 3; ++k) {
                row[3 * c + k] = u(rng) < signal;
                any = any || row[3 * c + k];
            }
            if (!any) row[3 * c] = 1;
            for (std::size_t k = 9; k < 12; ++k) row[k] = u(rng) < 0.3;
            cells.insert(cells.end(), row.begin(), row.end());
        }
    }
    std::vector<std::string> features;
    for (std::size_t j = 0; j < d; ++j) features.push_back("f" + std::to_string(j));
    return PhenotypeMatrix(std::move(rows), std::move(features), std::move(cells));
}

// ---------------------------------------------------------------- t-SNE

/// Direct double-loop KL(P || Q) with the same probability floor.
inline double kl_oracle(const SquareMatrix& p, const std::vector<Point>& y) {
    const std::size_t n = y.size();
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) z += 1.0 / (1.0 + std::pow(y[i].x - y[j].x, 2) + std::pow(y[i].y - y[j].y, 2));
        }
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double q = (1.0 / (1.0 + std::pow(y[i].x - y[j].x, 2) + std::pow(y[i].y - y[j].y, 2))) / z;
            const double pp = std::max(p(i, j), 1e-12);
            kl += pp * std::log(pp / std::max(q, 1e-12));
        }
    }
    return kl;
}

/// Random valid joint distribution: symmetric, zero diagonal, unit mass.
inline SquareMatrix random_joint(std::size_t n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    SquareMatrix p(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = u(rng);
            p(i, j) = v;
            p(j, i) = v;
            total += 2 * v;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) p(i, j) /= total;
    }
    return p;
}

/// Central finite differences of `f` around `y`.
template <class F>
std::vector<Point> finite_difference(F&& f, std::vector<Point> y, double h) {
    std::vector<Point> g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (int axis = 0; axis < 2; ++axis) {
            double& v = axis == 0 ? y[i].x : y[i].y;
            const double keep = v;
            v = keep + h;
            const double up = f(y);
            v = keep - h;
            const double down = f(y);
            v = keep;
            (axis == 0 ? g[i].x : g[i].y) = (up - down) / (2 * h);
        }
    }
    return g;
}

/// Perplexity 2^H (H in bits) of a probability vector.
inline double perplexity_of(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0) h -= v * std::log2(v);
    }
    return std::exp2(h);
}

/// Conditional row by an independent bisection on log(beta).
inline std::vector<double> conditional_oracle(const std::vector<double>& d, double perplexity) {
    auto row = [&](double beta) {
        std::vector<double> p(d.size());
        const double dmin = *std::min_element(d.begin(), d.end());
        double z = 0;
        for (std::size_t j = 0; j < d.size(); ++j) z += p[j] = std::exp(-beta * (d[j] - dmin));
        for (auto& v : p) v /= z;
        return p;
    };
    double lo = -30, hi = 30;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (perplexity_of(row(std::exp(mid))) > perplexity) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return row(std::exp(0.5 * (lo + hi)));
}

/// Mean silhouette over all points with euclidean distance.
inline double silhouette(const std::vector<Point>& y, const std::vector<std::string>& labels) {
    const std::size_t n = y.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<std::string, std::pair<double, std::size_t>> by_class;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dist = std::hypot(y[i].x - y[j].x, y[i].y - y[j].y);
            auto& acc = by_class[labels[j]];
            acc.first += dist;
            ++acc.second;
        }
        const auto own = by_class.find(labels[i]);
        if (own == by_class.end() || own->second.second == 0) continue;  // singleton: s = 0
        const double a = own->second.first / static_cast<double>(own->second.second);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [cls, acc] : by_class) {
            if (cls != labels[i]) b = std::min(b, acc.first / static_cast<double>(acc.second));
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

// ---------------------------------------------------------------- Shapley

/// Shapley values by averaging marginal contributions over all d!
/// orderings, evaluating predict_proba directly for every prefix.
inline std::vector<double> shapley_permutation_oracle(const SurrogateModel& model,
                                                      std::span<const std::uint8_t> obs, std::size_t cls) {
    const std::size_t d = model.num_features();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> phi(d, 0.0);
    std::size_t count = 0;
    do {
        std::vector<std::size_t> prefix;
        double prev = predict_proba(model, obs, prefix)[cls];
        for (auto j : order) {
            prefix.push_back(j);
            const double next = predict_proba(model, obs, prefix)[cls];
            phi[j] += next - prev;
            prev = next;
        }
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    for (auto& v : phi) v /= static_cast<double>(count);
    return phi;
}

/// Softmax of negative squared distances from the imputed vector, written out.
inline std::vector<double> proba_oracle(const SurrogateModel& m, std::span<const std::uint8_t> obs,
                                        const std::vector<bool>& in) {
    std::vector<double> e(m.num_classes());
    double z = 0;
    for (std::size_t c = 0; c < e.size(); ++c) {
        double s = 0;
        for (std::size_t j = 0; j < m.num_features(); ++j) {
            const double v = in[j] ? obs[j] : m.global_means[j];
            s += (v - m.class_mean(c, j)) * (v - m.class_mean(c, j));
        }
        e[c] = std::exp(-s);
        z += e[c];
    }
    for (auto& v : e) v /= z;
    return e;
}

// ---------------------------------------------------------------- SVG

using boost::property_tree::ptree;

/// Strict parse; throws on malformed XML.
inline ptree parse_xml(const std::string& text) {
    ptree tree;
    std::istringstream in(text);
    boost::property_tree::read_xml(in, tree);
    return tree;
}

inline std::string attr(const ptree& node, const std::string& name) {
    return node.get<std::string>("<xmlattr>." + name, "");
}

/// Every element with tag `tag` below the svg root, in document order.
inline std::vector<ptree> elements(const ptree& svg_root, const std::string& tag) {
    std::vector<ptree> out;
    for (const auto& [key, child] : svg_root) {
        if (key == tag) out.push_back(child);
    }
    return out;
}

inline std::size_t count_class(const std::vector<ptree>& nodes, const std::string& token) {
    std::size_t n = 0;
    for (const auto& node : nodes) {
        std::istringstream cls(attr(node, "class"));
        std::string t;
        while (cls >> t) {
            if (t == token) {
                ++n;
                break;
            }
        }
    }
    return n;
}

}  // namespace phenomap::testing

#endif
