#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "glip/family.hpp"
#include "glip/graph.hpp"
#include "glip/separation.hpp"
#include "support/bruteforce.hpp"

using namespace glip;

TEST_CASE("six node fixture distances") {
  MixedGraph g = testsup::six_node_fixture();
  CHECK(m_distance(g, 0, 2, bit(1)) == 2);
  CHECK(m_distance(g, 0, 3, bit(1)) == 3);
  CHECK(m_distance(g, 0, 4, bit(5)) == 2);
  CHECK(m_distance(g, 3, 4, bit(5)) == 1);
  CHECK(m_distance(g, 0, 2, 0) == g.d());
  CHECK_FALSE(separated(g, 0, 2, bit(1), Criterion::D));
  CHECK(separated(g, 0, 2, 0, Criterion::D));
}

TEST_CASE("confounded fixture separations") {
  MixedGraph g = testsup::confounded_dag();
  CHECK(separated(g, 1, 2, bit(0), Criterion::M));
  CHECK_FALSE(separated(g, 2, 1, 0, Criterion::M));
  CHECK_FALSE(separated(g, 1, 2, bit(0) | bit(3), Criterion::M));

  MixedGraph p = testsup::confounded_projection();
  CHECK(separated(p, 1, 2, bit(0), Criterion::M));
  CHECK_FALSE(separated(p, 1, 2, 0, Criterion::M));
}

TEST_CASE("argument conventions") {
  MixedGraph g(3);
  g.set_dir(0, 1);
  CHECK(separated(g, 0, 1, bit(0) | bit(2), Criterion::M));
  CHECK(separated(g, 0, 1, bit(1), Criterion::MC));
  CHECK_THROWS(m_distance(g, 0, 1, bit(0)));
  CHECK_THROWS(m_distance(g, 0, 0, 0));
  CHECK_THROWS(separated(g, 0, 3, 0, Criterion::M));
  CHECK_THROWS(distance(g, DistanceKind::ANTERIOR, 0, 1, bit(2)));
  CHECK_THROWS(distance(g, DistanceKind::UNDIRECTED, 0, 1, bit(2)));
}

TEST_CASE("sentinel values") {
  CHECK(mc_walk_cap(3) == 2);
  CHECK(mc_walk_cap(4) == 4);
  CHECK(mc_walk_cap(6) == 8);
  CHECK(distance_sentinel(DistanceKind::MC_DIST, 4) == 5);
  CHECK(distance_sentinel(DistanceKind::M_DIST, 4) == 4);
  CHECK(distance_sentinel(DistanceKind::BIDIRECTED, 5) == 5);

  MixedGraph g(4);
  g.set_dir(0, 1);
  CHECK(m_distance(g, 0, 2, 0) == 4);
  CHECK(mc_distance(g, 0, 2, 0) == 5);
  CHECK(m_distance(g, 0, 1, 0) == 1);
  CHECK(mc_distance(g, 0, 1, 0) == 1);
}

TEST_CASE("auxiliary walk distances") {
  MixedGraph g(4);
  g.set_bid(0, 1);
  g.set_bid(1, 2);
  g.set_dir(3, 0);

  // Bidirected walks need every node, endpoints included, inside C.
  NodeSet all = full_set(4);
  CHECK(bidirected_distance(g, 0, 2, all) == 2);
  CHECK(bidirected_distance(g, 0, 1, all) == 1);
  CHECK(bidirected_distance(g, 0, 2, bit(0) | bit(2)) == 4);
  CHECK(bidirected_distance(g, 0, 2, 0) == 4);
  CHECK(bidirected_distance(g, 0, 3, all) == 4);

  // Semi-bidirected: one strictly directed or bidirected edge out of i,
  // then bidirected steps inside C ending at j in C.
  CHECK(semi_bidirected_distance(g, 3, 2, all & ~bit(3)) == 3);
  CHECK(semi_bidirected_distance(g, 3, 0, bit(0)) == 1);
  CHECK(semi_bidirected_distance(g, 3, 2, bit(2)) == 4);
  CHECK(semi_bidirected_distance(g, 0, 3, bit(3)) == 4);

  MixedGraph h(3, true);
  h.set_und(0, 1);
  h.set_und(1, 2);
  CHECK(undirected_distance(h, 0, 2) == 2);
  CHECK(undirected_distance(h, 0, 1) == 1);
  h.set_dir(2, 0);
  CHECK(undirected_distance(h, 2, 0) == 2);

  MixedGraph a(3, true);
  a.set_dir(0, 1);
  a.set_und(1, 2);
  CHECK(anterior_distance(a, 0, 2) == 2);
  CHECK(anterior_distance(a, 2, 0) == 3);
  CHECK(anterior_distance(a, 0, 1) == 1);
}

TEST_CASE("slides") {
  MixedGraph g(3, true);
  g.set_dir(0, 1);
  g.set_und(1, 2);
  CHECK(slide_exists(g, 0, 1));
  CHECK(slide_exists(g, 0, 2));
  CHECK_FALSE(slide_exists(g, 1, 0));
  CHECK_FALSE(slide_exists(g, 2, 0));

  MixedGraph u(2, true);
  u.set_und(0, 1);
  CHECK_FALSE(slide_exists(u, 0, 1));
}

TEST_CASE("state search matches path enumeration") {
  auto rng = std::mt19937_64(21);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    int d = 2 + static_cast<int>(rng() % 4);
    MixedGraph g = testsup::rand_graph(rng, d, static_cast<GraphClass>(trial % 4));
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (NodeSet C = 0; C < full_set(d) + 1; ++C) {
          if (contains(C, i) || contains(C, j)) continue;
          CHECK(m_distance(g, i, j, C) == testsup::slow_m_distance(g, i, j, C));
          CHECK(mc_distance(g, i, j, C) == testsup::slow_mc_distance(g, i, j, C));
          ++checked;
        }
  }
  CHECK(checked > 2000);
}

TEST_CASE("collider-in-C walks certify the same separations") {
  auto rng = std::mt19937_64(22);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + static_cast<int>(rng() % 5);
    MixedGraph g = testsup::rand_graph(rng, d, static_cast<GraphClass>(trial % 4));
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (NodeSet C = 0; C < full_set(d) + 1; ++C) {
          if (contains(C, i) || contains(C, j)) continue;
          CHECK(separated(g, i, j, C, Criterion::M) == separated(g, i, j, C, Criterion::MC));
        }
  }
}

TEST_CASE("bounded collider walks respect the cap") {
  auto rng = std::mt19937_64(23);
  for (int trial = 0; trial < 80; ++trial) {
    int d = 3 + static_cast<int>(rng() % 4);
    MixedGraph g = testsup::rand_dmg(rng, d);
    int cap = mc_walk_cap(d);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (NodeSet C = 0; C < full_set(d) + 1; ++C) {
          if (contains(C, i) || contains(C, j)) continue;
          int l = mc_distance(g, i, j, C);
          CHECK((l <= cap || l == cap + 1));
        }
  }
}

TEST_CASE("directed separation agrees with the moral-graph check") {
  auto rng = std::mt19937_64(24);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + static_cast<int>(rng() % 5);
    MixedGraph dag = testsup::rand_dag(rng, d);
    MixedGraph hyb(d, true);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j && dag.dir(i, j)) hyb.set_dir(i, j);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (NodeSet C = 0; C < full_set(d) + 1; ++C) {
          if (contains(C, i) || contains(C, j)) continue;
          CHECK(separated(dag, i, j, C, Criterion::D) ==
                separated(hyb, i, j, C, Criterion::C_SEP));
        }
  }
}

TEST_CASE("decomposable distance certifies moral separation on chain graphs") {
  auto rng = std::mt19937_64(25);
  for (int trial = 0; trial < 60; ++trial) {
    int d = 2 + static_cast<int>(rng() % 4);
    MixedGraph g = testsup::rand_chain(rng, d);
    DecomposableOracle oracle(g);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (NodeSet C = 0; C < full_set(d) + 1; ++C) {
          if (contains(C, i) || contains(C, j)) continue;
          bool sep = moral_separated(g, i, j, C);
          CHECK((oracle.distance(i, j, C) == d) == sep);
          CHECK((decomposable_distance(g, i, j, C) == d) == sep);
        }
  }
}

TEST_CASE("distance symmetry") {
  auto rng = std::mt19937_64(26);
  for (int trial = 0; trial < 40; ++trial) {
    int d = 2 + static_cast<int>(rng() % 4);
    MixedGraph g = testsup::rand_dmg(rng, d);
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (NodeSet C = 0; C < full_set(d) + 1; ++C) {
          if (contains(C, i) || contains(C, j)) continue;
          CHECK(m_distance(g, i, j, C) == m_distance(g, j, i, C));
          CHECK(mc_distance(g, i, j, C) == mc_distance(g, j, i, C));
        }
  }

  // Anterior reachability is directional.
  MixedGraph a(2);
  a.set_dir(0, 1);
  CHECK(anterior_distance(a, 0, 1) == 1);
  CHECK(anterior_distance(a, 1, 0) == 2);
}

TEST_CASE("separation records") {
  ConditioningFamily fam = family_k(3, 1);
  MixedGraph e(3);
  auto recs = all_separations(e, Criterion::M, fam.sets);
  CHECK(static_cast<int>(recs.size()) == triple_count(fam));
  CHECK(recs.size() == 6);
  for (const auto& r : recs) CHECK(r.separated);

  MixedGraph g = testsup::confounded_dag();
  ConditioningFamily ff = family_full(6);
  auto all = all_separations(g, Criterion::M, ff.sets);
  CHECK(static_cast<int>(all.size()) == triple_count(ff));
  bool found = false;
  for (const auto& r : all)
    if (r.i == 1 && r.j == 2 && r.cond == bit(0)) {
      found = true;
      CHECK(r.separated);
    }
  CHECK(found);
}

TEST_CASE("markov equivalence") {
  ConditioningFamily fam = family_full(3);
  MixedGraph chain(3);
  chain.set_dir(0, 1);
  chain.set_dir(1, 2);
  MixedGraph rev(3);
  rev.set_dir(2, 1);
  rev.set_dir(1, 0);
  MixedGraph fork(3);
  fork.set_dir(1, 0);
  fork.set_dir(1, 2);
  MixedGraph coll(3);
  coll.set_dir(0, 1);
  coll.set_dir(2, 1);
  CHECK(markov_equivalent(chain, chain, Criterion::D, fam.sets));
  CHECK(markov_equivalent(chain, rev, Criterion::D, fam.sets));
  CHECK(markov_equivalent(chain, fork, Criterion::D, fam.sets));
  CHECK_FALSE(markov_equivalent(chain, coll, Criterion::D, fam.sets));
}
