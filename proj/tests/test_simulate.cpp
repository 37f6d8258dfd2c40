#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "glip/family.hpp"
#include "glip/pvalues.hpp"
#include "glip/separation.hpp"
#include "glip/simulate.hpp"

using namespace glip;

TEST_CASE("rng basics") {
  Rng a(123);
  Rng b(123);
  for (int i = 0; i < 100; ++i) {
    double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng c(124);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs = differs || a.uniform() != c.uniform();
  CHECK(differs);

  Rng d(7);
  double mean = 0, var = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double g = d.gauss();
    mean += g;
    var += g * g;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);

  for (int i = 0; i < 200; ++i) CHECK(d.below(7) < 7);
  double lo = d.uniform(2.0, 5.0);
  CHECK(lo >= 2.0);
  CHECK(lo < 5.0);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.d = 4;
  cfg.edge_prob = 0.5;
  CHECK_THROWS(cfg.validate());
  cfg.set_seed(1);
  CHECK_NOTHROW(cfg.validate());
  cfg.n = 0;
  CHECK_THROWS(cfg.validate());
  cfg.n = 10;
  cfg.weight_lo = 3;
  cfg.weight_hi = 2;
  CHECK_THROWS(cfg.validate());
  cfg.weight_hi = 4;

  cfg.scheme = EdgeScheme::EXPECTED_DEGREE;
  cfg.expected_degree = 2.0;
  CHECK(cfg.edge_probability(5) == Catch::Approx(0.5));
  cfg.expected_degree = 9.0;
  CHECK_THROWS(cfg.edge_probability(5));
  cfg.scheme = EdgeScheme::EDGE_PROB;
  cfg.edge_prob = 1.5;
  CHECK_THROWS(cfg.edge_probability(5));
}

TEST_CASE("random dags") {
  SimConfig cfg;
  cfg.d = 6;
  cfg.edge_prob = 0.4;
  cfg.set_seed(99);
  WeightedDag wd = random_dag(cfg);
  CHECK(wd.graph.d() == 6);
  CHECK(wd.graph.valid(GraphClass::DAG));
  CHECK(wd.weights.size() == static_cast<std::size_t>(wd.graph.edge_count()));
  for (const auto& [e, w] : wd.weights) {
    CHECK(wd.graph.dir(e.first, e.second));
    CHECK(w >= cfg.weight_lo);
    CHECK(w <= cfg.weight_hi);
  }

  // Same seed, same draw; new seed, eventually different.
  WeightedDag again = random_dag(cfg);
  CHECK(again.graph == wd.graph);
  CHECK(again.weights == wd.weights);

  cfg.edge_prob = 0.0;
  CHECK(random_dag(cfg).graph.edge_count() == 0);
  cfg.edge_prob = 1.0;
  CHECK(random_dag(cfg).graph.edge_count() == 15);

  // Edge probability p = 1/(d-1) keeps the expected count near d/2.
  cfg.edge_prob = 1.0 / 5.0;
  int total = 0;
  for (int s = 0; s < 400; ++s) {
    cfg.set_seed(1000 + s);
    total += random_dag(cfg).graph.edge_count();
  }
  CHECK(total > 400 * 2);
  CHECK(total < 400 * 4);
}

TEST_CASE("latent scenarios") {
  SimConfig cfg;
  cfg.d = 4;
  cfg.latent = 2;
  cfg.edge_prob = 0.5;
  cfg.set_seed(31);
  AdmgScenario sc = random_admg(cfg);
  CHECK(sc.hidden.graph.d() == 6);
  CHECK(sc.admg.d() == 4);
  CHECK(sc.admg.valid(GraphClass::ADMG));
  CHECK(popcount(sc.latent_set) == 2);
  REQUIRE(sc.observed.size() == 4);
  for (std::size_t a = 1; a < sc.observed.size(); ++a)
    CHECK(sc.observed[a - 1] < sc.observed[a]);

  // Projection preserves m-separation over the observed margin.
  ConditioningFamily fam = family_full(4);
  for (NodeSet c : fam.sets)
    for (int i = 0; i < 4; ++i) {
      if (contains(c, i)) continue;
      for (int j = i + 1; j < 4; ++j) {
        if (contains(c, j)) continue;
        NodeSet hc = 0;
        for_each_node(c, [&](int v) { hc |= bit(sc.observed[v]); });
        CHECK(separated(sc.admg, i, j, c, Criterion::M) ==
              separated(sc.hidden.graph, sc.observed[i], sc.observed[j], hc, Criterion::M));
      }
    }

  cfg.latent = 0;
  CHECK_THROWS(random_admg(cfg));
}

TEST_CASE("noise variances") {
  Rng rng(5);
  auto va = draw_noise_variances(2000, NoiseLaw::UNEQUAL_VAR_A, rng);
  double mean = 0;
  for (double v : va) {
    CHECK(v >= 1e-2);
    mean += v;
  }
  CHECK(std::abs(mean / 2000 - 1.0) < 0.05);

  auto vb = draw_noise_variances(2000, NoiseLaw::UNEQUAL_VAR_B, rng);
  for (double v : vb) {
    CHECK(v >= 1.0);
    CHECK(v <= 2.0);
  }
}

TEST_CASE("population covariance matches the linear model") {
  // A := N_A, B := N_B, C := A + B + N_C, D := C + N_D with unit variances:
  // var(C) = 3, var(D) = 4, cov(A,B) = 0, cov(A,D) = 1.
  WeightedDag wd = example_collider_chain();
  std::vector<double> unit(4, 1.0);
  Eigen::MatrixXd s = population_covariance(wd, unit);
  CHECK(s(0, 0) == Catch::Approx(1.0));
  CHECK(s(0, 1) == Catch::Approx(0.0).margin(1e-12));
  CHECK(s(2, 2) == Catch::Approx(3.0));
  CHECK(s(3, 3) == Catch::Approx(4.0));
  CHECK(s(0, 2) == Catch::Approx(1.0));
  CHECK(s(0, 3) == Catch::Approx(1.0));
  CHECK(s(1, 3) == Catch::Approx(1.0));
  CHECK(s == s.transpose().eval());
}

TEST_CASE("sample covariance concentrates on the population value") {
  SimConfig cfg;
  cfg.d = 5;
  cfg.edge_prob = 0.4;
  cfg.n = 100000;
  cfg.set_seed(77);
  WeightedDag wd = random_dag(cfg);
  Rng rng(cfg.seed);
  auto var = draw_noise_variances(5, cfg.noise, rng);
  Eigen::MatrixXd x = sample_linear_gaussian(wd, var, cfg.n, rng);
  REQUIRE(x.rows() == cfg.n);
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd sample = centered.transpose() * centered / double(cfg.n - 1);
  Eigen::MatrixXd pop = population_covariance(wd, var);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double se = std::sqrt((pop(i, i) * pop(j, j) + pop(i, j) * pop(i, j)) / cfg.n);
      CHECK(std::abs(sample(i, j) - pop(i, j)) < 5 * se);
    }
}

TEST_CASE("collider fixture keeps its marginal independence in finite samples") {
  // A and B are separated marginally; the test on n = 300 rows should
  // accept that independence in nearly every replication.
  WeightedDag wd = example_collider_chain();
  std::vector<double> unit(4, 1.0);
  int accepted = 0;
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(9000 + rep);
    Eigen::MatrixXd x = sample_linear_gaussian(wd, unit, 300, rng);
    auto p = fisher_z_test(x, 0, 1, 0);
    REQUIRE(p.has_value());
    if (*p > 0.001) ++accepted;
  }
  CHECK(accepted >= 45);

  // Conditioning on the collider's child makes A and B dependent.
  int rejected = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(9500 + rep);
    Eigen::MatrixXd x = sample_linear_gaussian(wd, unit, 300, rng);
    auto p = fisher_z_test(x, 0, 1, bit(3));
    REQUIRE(p.has_value());
    if (*p <= 0.001) ++rejected;
  }
  CHECK(rejected >= 45);
}

TEST_CASE("data table wrapper") {
  Eigen::MatrixXd x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  DataTable t = to_data_table(x);
  REQUIRE(t.names.size() == 3);
  CHECK(t.names[0] == "X1");
  CHECK(t.names[2] == "X3");
  CHECK(t.x == x);
}
