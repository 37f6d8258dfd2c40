#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "graph.hpp"
#include "pvalues.hpp"

namespace glip {

// Deterministic generator: all randomness flows through one seeded engine so
// identical configs reproduce identical outputs bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2 * uniform() - 1;
      v = 2 * uniform() - 1;
      s = u * u + v * v;
    } while (s >= 1 || s == 0);
    double f = std::sqrt(-2 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Uniform integer in [0, n) without modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return r % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0;
  bool has_spare_ = false;
};

enum class EdgeScheme { EDGE_PROB, EXPECTED_DEGREE };
enum class NoiseLaw { UNEQUAL_VAR_A, UNEQUAL_VAR_B };

struct SimConfig {
  int d = 0;
  EdgeScheme scheme = EdgeScheme::EDGE_PROB;
  double edge_prob = 0;
  double expected_degree = 0;
  double weight_lo = 1;
  double weight_hi = 4;
  NoiseLaw noise = NoiseLaw::UNEQUAL_VAR_A;
  int n = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int latent = 0;

  void set_seed(std::uint64_t s) {
    seed = s;
    seed_set = true;
  }
  double edge_probability(int nodes) const {
    double p = scheme == EdgeScheme::EDGE_PROB ? edge_prob : expected_degree / (nodes - 1);
    if (p < 0 || p > 1) throw std::invalid_argument("edge probability outside [0,1]");
    return p;
  }
  void validate() const {
    check_node_count(d);
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    if (!seed_set) throw std::invalid_argument("seed is mandatory");
    if (weight_hi < weight_lo) throw std::invalid_argument("empty weight range");
    if (latent < 0) throw std::invalid_argument("negative latent count");
  }
};

// Edge-weight container: weights[{i,j}] is the coefficient on i -> j.
struct WeightedDag {
  MixedGraph graph{1, false};
  std::map<std::pair<int, int>, double> weights;
};

// Uniform random topological order, then independent forward edges.
inline WeightedDag random_dag_on(int nodes, const SimConfig& cfg, Rng& rng) {
  std::vector<int> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  for (int i = nodes - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  double p = cfg.edge_probability(nodes);
  WeightedDag out;
  out.graph = MixedGraph(nodes, false);
  for (int a = 0; a < nodes; ++a)
    for (int b = a + 1; b < nodes; ++b)
      if (rng.bernoulli(p)) {
        out.graph.set_dir(order[a], order[b], true);
        out.weights[{order[a], order[b]}] = rng.uniform(cfg.weight_lo, cfg.weight_hi);
      }
  return out;
}

inline WeightedDag random_dag(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  return random_dag_on(cfg.d, cfg, rng);
}

struct AdmgScenario {
  MixedGraph admg{1, false};
  WeightedDag hidden;
  NodeSet latent_set = 0;
  std::vector<int> observed;
};

// DAG on d + latent nodes, projected over a random latent subset.
inline AdmgScenario random_admg(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.latent < 1) throw std::invalid_argument("latent must be at least 1");
  Rng rng(cfg.seed);
  int total = cfg.d + cfg.latent;
  check_node_count(total);
  AdmgScenario sc;
  sc.hidden = random_dag_on(total, cfg, rng);
  std::vector<int> ids(total);
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = total - 1; i > 0; --i)
    std::swap(ids[i], ids[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  for (int k = 0; k < cfg.latent; ++k) sc.latent_set |= bit(ids[k]);
  for (int v = 0; v < total; ++v)
    if (!contains(sc.latent_set, v)) sc.observed.push_back(v);
  sc.admg = latent_projection(sc.hidden.graph, sc.latent_set);
  return sc;
}

inline std::vector<double> draw_noise_variances(int nodes, NoiseLaw law, Rng& rng) {
  std::vector<double> var(nodes);
  for (int i = 0; i < nodes; ++i) {
    if (law == NoiseLaw::UNEQUAL_VAR_A) var[i] = std::max(1 + 0.1 * rng.gauss(), 1e-2);
    else var[i] = rng.uniform(1, 2);
  }
  return var;
}

namespace detail {

inline std::vector<int> topological_order(const MixedGraph& g) {
  const int d = g.d();
  std::vector<int> indeg(d, 0), order;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && g.dir(i, j)) ++indeg[j];
  std::vector<int> ready;
  for (int i = 0; i < d; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    int v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (int j = 0; j < d; ++j)
      if (j != v && g.dir(v, j) && --indeg[j] == 0) ready.push_back(j);
  }
  if (static_cast<int>(order.size()) != d) throw std::invalid_argument("graph has a directed cycle");
  return order;
}

}  // namespace detail

// Forward simulation X_j = sum_{i -> j} w_ij X_i + eps_j in topological order.
inline Eigen::MatrixXd sample_linear_gaussian(const WeightedDag& wd,
                                              const std::vector<double>& variances, int n,
                                              Rng& rng) {
  const int d = wd.graph.d();
  if (static_cast<int>(variances.size()) != d)
    throw std::invalid_argument("variance count mismatch");
  std::vector<int> order = detail::topological_order(wd.graph);
  Eigen::MatrixXd x(n, d);
  std::vector<double> sd(d);
  for (int i = 0; i < d; ++i) sd[i] = std::sqrt(variances[i]);
  for (int r = 0; r < n; ++r)
    for (int j : order) {
      double v = sd[j] * rng.gauss();
      for (int i = 0; i < d; ++i)
        if (i != j && wd.graph.dir(i, j)) v += wd.weights.at({i, j}) * x(r, i);
      x(r, j) = v;
    }
  return x;
}

inline Eigen::MatrixXd sample_linear_gaussian(const WeightedDag& wd, const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<double> var = draw_noise_variances(wd.graph.d(), cfg.noise, rng);
  return sample_linear_gaussian(wd, var, cfg.n, rng);
}

// Sigma = (I - W)^{-T} D (I - W)^{-1} with W[i][j] the weight on i -> j.
inline Eigen::MatrixXd population_covariance(const WeightedDag& wd,
                                             const std::vector<double>& variances) {
  const int d = wd.graph.d();
  if (static_cast<int>(variances.size()) != d)
    throw std::invalid_argument("variance count mismatch");
  detail::topological_order(wd.graph);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [edge, coef] : wd.weights) w(edge.first, edge.second) = coef;
  Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(d, d) - w).inverse();
  Eigen::VectorXd dv(d);
  for (int i = 0; i < d; ++i) dv(i) = variances[i];
  return a.transpose() * dv.asDiagonal() * a;
}

inline DataTable to_data_table(const Eigen::MatrixXd& x) {
  DataTable t;
  t.x = x;
  for (int j = 0; j < x.cols(); ++j) t.names.push_back("X" + std::to_string(j + 1));
  return t;
}

// Fixture: A and B are independent causes of C, D is a child of C.
inline WeightedDag example_collider_chain() {
  WeightedDag wd;
  wd.graph = MixedGraph(4, false);
  wd.graph.set_dir(0, 2, true);
  wd.graph.set_dir(1, 2, true);
  wd.graph.set_dir(2, 3, true);
  wd.weights[{0, 2}] = 1.0;
  wd.weights[{1, 2}] = 1.0;
  wd.weights[{2, 3}] = 1.0;
  return wd;
}

}  // namespace glip
