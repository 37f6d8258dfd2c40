#pragma once

#include <climits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "glip/graph.hpp"

namespace glip {

// Pairwise separation criteria. D and M use the ancestor rule for colliders;
// MC requires colliders inside the conditioning set and bounds walk length;
// C_SEP is undirected separation in the anterior-induced moral graph.
enum class Criterion { D, M, MC, C_SEP };

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::D: return "d";
    case Criterion::M: return "m";
    case Criterion::MC: return "mc";
    case Criterion::C_SEP: return "c";
  }
  return "?";
}

inline Criterion criterion_from_string(const std::string& s) {
  if (s == "d") return Criterion::D;
  if (s == "m") return Criterion::M;
  if (s == "mc" || s == "dc") return Criterion::MC;
  if (s == "c") return Criterion::C_SEP;
  throw std::invalid_argument("unknown criterion: " + s);
}

enum class DistanceKind {
  D_DIST,
  M_DIST,
  MC_DIST,
  DECOMPOSABLE,
  BIDIRECTED,
  SEMI_BIDIRECTED,
  ANTERIOR,
  UNDIRECTED,
};

// Maximal length of a shortest collider-in-C connecting walk.
inline int mc_walk_cap(int d) { return d < 4 ? d - 1 : 2 * d - 4; }

// Value meaning "no connecting structure" for each kind.
inline int distance_sentinel(DistanceKind kind, int d) {
  if (kind == DistanceKind::MC_DIST) return mc_walk_cap(d) + 1;
  return d;
}

namespace detail {

inline void check_pair_cond(const MixedGraph& g, int i, int j, NodeSet C, bool exclude_endpoints) {
  if (i < 0 || j < 0 || i >= g.d() || j >= g.d() || i == j)
    throw std::invalid_argument("invalid node pair");
  if (exclude_endpoints && (contains(C, i) || contains(C, j)))
    throw std::invalid_argument("conditioning set contains an endpoint");
}

}  // namespace detail

// Shortest connecting path between i and j given C with colliders in an(C)
// and noncolliders outside C; d when none exists. A state search over
// (node, arrived-with-head) finds the shortest legal walk, and the shortest
// such walk is a path, so the result never exceeds d - 1.
inline int m_distance(const MixedGraph& g, int i, int j, NodeSet C) {
  if (g.hybrid()) throw std::invalid_argument("m distance expects a dmg-mode graph");
  detail::check_pair_cond(g, i, j, C, true);
  const int d = g.d();
  const NodeSet anc = g.anteriors(C);
  std::vector<int> dist(2 * d, -1);
  std::vector<int> q;
  q.reserve(2 * d);
  auto push = [&](int v, int head, int len) {
    int s = 2 * v + head;
    if (dist[s] < 0) {
      dist[s] = len;
      q.push_back(s);
    }
  };
  for (int v = 0; v < d; ++v) {
    if (v == i) continue;
    if (g.dir(i, v)) push(v, 1, 1);
    if (g.dir(v, i)) push(v, 0, 1);
    if (g.bid(i, v)) push(v, 1, 1);
  }
  for (std::size_t h = 0; h < q.size(); ++h) {
    int s = q[h], u = s / 2, head_in = s & 1, len = dist[s];
    if (u == j) continue;
    bool collider_ok = contains(anc, u);
    bool noncollider_ok = !contains(C, u);
    for (int v = 0; v < d; ++v) {
      if (v == u) continue;
      if (g.dir(u, v) && noncollider_ok) push(v, 1, len + 1);
      if (g.dir(v, u) && (head_in ? collider_ok : noncollider_ok)) push(v, 0, len + 1);
      if (g.bid(u, v) && (head_in ? collider_ok : noncollider_ok)) push(v, 1, len + 1);
    }
  }
  int best = INT_MAX;
  for (int m = 0; m < 2; ++m)
    if (dist[2 * j + m] >= 0 && dist[2 * j + m] < best) best = dist[2 * j + m];
  if (best == INT_MAX) return d;
  if (best > d - 1) throw std::logic_error("connecting walk longer than any path");
  return best;
}

// Shortest connecting walk between i and j given C with all colliders in C
// and noncolliders outside C, capped at the walk bound; cap + 1 when none.
inline int mc_distance(const MixedGraph& g, int i, int j, NodeSet C) {
  if (g.hybrid()) throw std::invalid_argument("mc distance expects a dmg-mode graph");
  detail::check_pair_cond(g, i, j, C, true);
  const int d = g.d();
  const int cap = mc_walk_cap(d);
  std::vector<int> dist(2 * d, -1);
  std::vector<int> q;
  q.reserve(2 * d);
  auto push = [&](int v, int head, int len) {
    int s = 2 * v + head;
    if (dist[s] < 0) {
      dist[s] = len;
      q.push_back(s);
    }
  };
  for (int v = 0; v < d; ++v) {
    if (v == i) continue;
    if (g.dir(i, v)) push(v, 1, 1);
    if (g.dir(v, i)) push(v, 0, 1);
    if (g.bid(i, v)) push(v, 1, 1);
  }
  for (std::size_t h = 0; h < q.size(); ++h) {
    int s = q[h], u = s / 2, head_in = s & 1, len = dist[s];
    if (u == j || len == cap) continue;
    bool collider_ok = contains(C, u);
    bool noncollider_ok = !contains(C, u);
    for (int v = 0; v < d; ++v) {
      if (v == u) continue;
      if (g.dir(u, v) && noncollider_ok) push(v, 1, len + 1);
      if (g.dir(v, u) && (head_in ? collider_ok : noncollider_ok)) push(v, 0, len + 1);
      if (g.bid(u, v) && (head_in ? collider_ok : noncollider_ok)) push(v, 1, len + 1);
    }
  }
  int best = INT_MAX;
  for (int m = 0; m < 2; ++m)
    if (dist[2 * j + m] >= 0 && dist[2 * j + m] < best) best = dist[2 * j + m];
  return best == INT_MAX ? cap + 1 : best;
}

// Shortest descending path from i to j; d when j is not reachable.
inline int anterior_distance(const MixedGraph& g, int i, int j) {
  detail::check_pair_cond(g, i, j, 0, false);
  NodeSet reach = bit(i);
  NodeSet frontier = bit(i);
  int depth = 0;
  while (frontier) {
    ++depth;
    NodeSet next = 0;
    for_each_node(frontier, [&](int u) { next |= g.children(u); });
    next &= ~reach;
    if (contains(next, j)) return depth;
    reach |= next;
    frontier = next;
  }
  return g.d();
}

// Shortest path of undirected edges between i and j; d when none exists.
inline int undirected_distance(const MixedGraph& g, int i, int j) {
  if (!g.hybrid()) throw std::invalid_argument("undirected distance expects a hybrid graph");
  detail::check_pair_cond(g, i, j, 0, false);
  NodeSet reach = bit(i);
  NodeSet frontier = bit(i);
  int depth = 0;
  while (frontier) {
    ++depth;
    NodeSet next = 0;
    for_each_node(frontier, [&](int u) { next |= g.und_neighbors(u); });
    next &= ~reach;
    if (contains(next, j)) return depth;
    reach |= next;
    frontier = next;
  }
  return g.d();
}

// Shortest bidirected path between i and j with every node, endpoints
// included, inside C; d when none exists.
inline int bidirected_distance(const MixedGraph& g, int i, int j, NodeSet C) {
  if (g.hybrid()) throw std::invalid_argument("bidirected distance expects a dmg-mode graph");
  detail::check_pair_cond(g, i, j, 0, false);
  if (!contains(C, i) || !contains(C, j)) return g.d();
  NodeSet reach = bit(i);
  NodeSet frontier = bit(i);
  int depth = 0;
  while (frontier) {
    ++depth;
    NodeSet next = 0;
    for_each_node(frontier, [&](int u) { next |= g.spouses(u); });
    next &= C & ~reach;
    if (contains(next, j)) return depth;
    reach |= next;
    frontier = next;
  }
  return g.d();
}

// Shortest path from i to j whose first edge has a head at its far end
// (i -> k or i <-> k) and whose remaining edges are bidirected, with i
// outside C and every other node inside C; d when none exists.
inline int semi_bidirected_distance(const MixedGraph& g, int i, int j, NodeSet C) {
  if (g.hybrid()) throw std::invalid_argument("semi-bidirected distance expects a dmg-mode graph");
  detail::check_pair_cond(g, i, j, 0, false);
  const int d = g.d();
  if (contains(C, i) || !contains(C, j)) return d;
  std::vector<int> to_j(d, -1);
  to_j[j] = 0;
  NodeSet reach = bit(j);
  NodeSet frontier = bit(j);
  int depth = 0;
  while (frontier) {
    ++depth;
    NodeSet next = 0;
    for_each_node(frontier, [&](int u) { next |= g.spouses(u); });
    next &= C & ~reach;
    for_each_node(next, [&](int u) { to_j[u] = depth; });
    reach |= next;
    frontier = next;
  }
  int best = d;
  for_each_node(C, [&](int k) {
    if (k == i || to_j[k] < 0) return;
    if ((g.dir(i, k) || g.bid(i, k)) && 1 + to_j[k] < best) best = 1 + to_j[k];
  });
  return best;
}

// Undirected separation of i and j given C in the moral graph of the
// subgraph induced by the anteriors of {i, j} union C.
inline bool moral_separated(const MixedGraph& g, int i, int j, NodeSet C) {
  detail::check_pair_cond(g, i, j, C, true);
  NodeSet A = g.anteriors(bit(i) | bit(j) | C);
  MixedGraph m = moral_graph(g, A);
  NodeSet reach = bit(i);
  NodeSet frontier = bit(i);
  while (frontier) {
    NodeSet next = 0;
    for_each_node(frontier, [&](int u) { next |= m.und_neighbors(u); });
    next &= ~reach & ~C;
    if (contains(next, j)) return false;
    reach |= next;
    frontier = next;
  }
  return true;
}

// Slide from i to j: a strictly directed first edge followed by an
// undirected path that avoids i.
inline bool slide_exists(const MixedGraph& g, int i, int j) {
  if (i < 0 || j < 0 || i >= g.d() || j >= g.d() || i == j)
    throw std::invalid_argument("invalid node pair");
  NodeSet comp = bit(j);
  NodeSet frontier = bit(j);
  while (frontier) {
    NodeSet next = 0;
    for_each_node(frontier, [&](int u) { next |= g.und_neighbors(u); });
    next &= ~comp & ~bit(i);
    comp |= next;
    frontier = next;
  }
  bool found = false;
  for_each_node(comp, [&](int t) {
    if (g.sdir(i, t)) found = true;
  });
  return found;
}

// Decomposable distance for hybrid graphs: the shortest connecting path in
// the anterior-induced moral graph all of whose subpaths survive in the
// moral graphs induced by their own endpoints; d when none exists. Moral
// adjacency is cached per anterior-closed node set, so reuse one oracle per
// graph across triples.
class DecomposableOracle {
 public:
  explicit DecomposableOracle(const MixedGraph& g) : g_(&g) {
    if (!g.hybrid()) throw std::invalid_argument("decomposable distance expects a hybrid graph");
  }

  int distance(int i, int j, NodeSet C) {
    const MixedGraph& g = *g_;
    detail::check_pair_cond(g, i, j, C, true);
    const int d = g.d();
    NodeSet A = g.anteriors(bit(i) | bit(j) | C);
    const std::vector<NodeSet>& H = adj(A);
    NodeSet reach = bit(i);
    NodeSet frontier = bit(i);
    while (frontier) {
      NodeSet next = 0;
      for_each_node(frontier, [&](int u) { next |= H[u]; });
      next &= ~reach & ~C;
      reach |= next;
      frontier = next;
    }
    if (!contains(reach, j)) return d;
    best_ = d;
    path_.assign(1, i);
    onpath_ = bit(i);
    cond_ = C;
    target_ = j;
    extend(H);
    return best_;
  }

 private:
  const std::vector<NodeSet>& adj(NodeSet A) {
    auto it = cache_.find(A);
    if (it == cache_.end()) {
      MixedGraph m = moral_graph(*g_, A);
      std::vector<NodeSet> rows(g_->d(), 0);
      for (int v = 0; v < g_->d(); ++v) rows[v] = m.und_neighbors(v);
      it = cache_.emplace(A, std::move(rows)).first;
    }
    return it->second;
  }

  bool subpaths_survive(int v) {
    int len = static_cast<int>(path_.size()) - 1;
    for (int a = len; a >= 0; --a) {
      const std::vector<NodeSet>& m = adj(g_->anteriors(bit(path_[a]) | bit(v) | cond_));
      if (!contains(m[path_[len]], v)) return false;
      for (int l = a; l < len; ++l)
        if (!contains(m[path_[l]], path_[l + 1])) return false;
    }
    return true;
  }

  void extend(const std::vector<NodeSet>& H) {
    int u = path_.back();
    int len = static_cast<int>(path_.size()) - 1;
    if (len + 1 >= best_) return;
    NodeSet cand = H[u] & ~onpath_ & ~cond_;
    for_each_node(cand, [&](int v) {
      if (len + 1 >= best_) return;
      if (!subpaths_survive(v)) return;
      if (v == target_) {
        best_ = len + 1;
        return;
      }
      path_.push_back(v);
      onpath_ |= bit(v);
      extend(H);
      path_.pop_back();
      onpath_ &= ~bit(v);
    });
  }

  const MixedGraph* g_;
  std::map<NodeSet, std::vector<NodeSet>> cache_;
  std::vector<int> path_;
  NodeSet onpath_ = 0;
  NodeSet cond_ = 0;
  int target_ = 0;
  int best_ = 0;
};

inline int decomposable_distance(const MixedGraph& g, int i, int j, NodeSet C) {
  DecomposableOracle oracle(g);
  return oracle.distance(i, j, C);
}

inline int distance(const MixedGraph& g, DistanceKind kind, int i, int j, NodeSet C = 0) {
  switch (kind) {
    case DistanceKind::D_DIST:
    case DistanceKind::M_DIST:
      return m_distance(g, i, j, C);
    case DistanceKind::MC_DIST:
      return mc_distance(g, i, j, C);
    case DistanceKind::DECOMPOSABLE:
      return decomposable_distance(g, i, j, C);
    case DistanceKind::BIDIRECTED:
      return bidirected_distance(g, i, j, C);
    case DistanceKind::SEMI_BIDIRECTED:
      return semi_bidirected_distance(g, i, j, C);
    case DistanceKind::ANTERIOR:
      if (C) throw std::invalid_argument("anterior distance takes no conditioning set");
      return anterior_distance(g, i, j);
    case DistanceKind::UNDIRECTED:
      if (C) throw std::invalid_argument("undirected distance takes no conditioning set");
      return undirected_distance(g, i, j);
  }
  throw std::invalid_argument("unknown distance kind");
}

// Pairwise separation. Triples with an endpoint inside C count as separated.
inline bool separated(const MixedGraph& g, int i, int j, NodeSet C, Criterion crit) {
  if (i < 0 || j < 0 || i >= g.d() || j >= g.d() || i == j)
    throw std::invalid_argument("invalid node pair");
  if (contains(C, i) || contains(C, j)) return true;
  switch (crit) {
    case Criterion::D:
    case Criterion::M:
      return m_distance(g, i, j, C) == g.d();
    case Criterion::MC:
      return mc_distance(g, i, j, C) == mc_walk_cap(g.d()) + 1;
    case Criterion::C_SEP:
      return moral_separated(g, i, j, C);
  }
  throw std::invalid_argument("unknown criterion");
}

struct SeparationRecord {
  int i;
  int j;
  NodeSet cond;
  bool separated;
};

// Separation status for every pair i < j and every conditioning set in the
// family, skipping triples whose conditioning set contains an endpoint.
inline std::vector<SeparationRecord> all_separations(const MixedGraph& g, Criterion crit,
                                                     const std::vector<NodeSet>& family) {
  std::vector<SeparationRecord> out;
  for (NodeSet C : family)
    for (int i = 0; i < g.d(); ++i)
      for (int j = i + 1; j < g.d(); ++j) {
        if (contains(C, i) || contains(C, j)) continue;
        out.push_back({i, j, C, separated(g, i, j, C, crit)});
      }
  return out;
}

inline bool markov_equivalent(const MixedGraph& g1, const MixedGraph& g2, Criterion crit,
                              const std::vector<NodeSet>& family) {
  if (g1.d() != g2.d()) throw std::invalid_argument("graphs differ in node count");
  for (NodeSet C : family)
    for (int i = 0; i < g1.d(); ++i)
      for (int j = i + 1; j < g1.d(); ++j) {
        if (contains(C, i) || contains(C, j)) continue;
        if (separated(g1, i, j, C, crit) != separated(g2, i, j, C, crit)) return false;
      }
  return true;
}

}  // namespace glip
