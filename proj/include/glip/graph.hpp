#pragma once

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "glip/bits.hpp"

namespace glip {

enum class GraphClass { DAG, DG, ADMG, DMG, CHAIN };

inline const char* to_string(GraphClass c) {
  switch (c) {
    case GraphClass::DAG: return "dag";
    case GraphClass::DG: return "dg";
    case GraphClass::ADMG: return "admg";
    case GraphClass::DMG: return "dmg";
    case GraphClass::CHAIN: return "chain";
  }
  return "?";
}

inline GraphClass graph_class_from_string(const std::string& s) {
  if (s == "dag") return GraphClass::DAG;
  if (s == "dg") return GraphClass::DG;
  if (s == "admg") return GraphClass::ADMG;
  if (s == "dmg") return GraphClass::DMG;
  if (s == "chain") return GraphClass::CHAIN;
  throw std::invalid_argument("unknown graph class: " + s);
}

// Directed/bidirected edges over <=32 nodes. Two conventions for a directed
// 2-cycle x(i,j)=x(j,i)=1: in dmg mode it is a genuine 2-cycle, in hybrid
// mode it encodes the undirected edge i -- j and bidirected edges are
// forbidden.
class MixedGraph {
 public:
  MixedGraph() : d_(0), hybrid_(false) {}
  MixedGraph(int d, bool hybrid = false) : d_(d), hybrid_(hybrid), dir_(d, 0), bid_(d, 0) {
    check_node_count(d);
  }

  int d() const { return d_; }
  bool hybrid() const { return hybrid_; }

  bool dir(int i, int j) const { return contains(dir_[i], j); }
  bool bid(int i, int j) const { return contains(bid_[i], j); }

  void set_dir(int i, int j, bool on = true) {
    check_pair(i, j);
    if (on) dir_[i] |= bit(j); else dir_[i] &= ~bit(j);
  }
  void set_bid(int i, int j, bool on = true) {
    check_pair(i, j);
    if (hybrid_) throw std::invalid_argument("bidirected edge in hybrid-mode graph");
    if (on) { bid_[i] |= bit(j); bid_[j] |= bit(i); }
    else { bid_[i] &= ~bit(j); bid_[j] &= ~bit(i); }
  }
  void set_und(int i, int j, bool on = true) {
    if (!hybrid_) throw std::invalid_argument("undirected edge in dmg-mode graph");
    set_dir(i, j, on);
    set_dir(j, i, on);
  }

  bool und(int i, int j) const { return hybrid_ && dir(i, j) && dir(j, i); }
  // Strictly directed: i -> j and not the undirected encoding.
  bool sdir(int i, int j) const { return dir(i, j) && !(hybrid_ && dir(j, i)); }
  bool adjacent(int i, int j) const { return dir(i, j) || dir(j, i) || bid(i, j); }

  NodeSet children(int i) const { return dir_[i]; }
  NodeSet parents(int j) const {
    NodeSet s = 0;
    for (int i = 0; i < d_; ++i)
      if (dir(i, j)) s |= bit(i);
    return s;
  }
  NodeSet spouses(int i) const { return bid_[i]; }
  NodeSet und_neighbors(int i) const {
    NodeSet s = 0;
    if (!hybrid_) return s;
    for_each_node(dir_[i], [&](int j) { if (dir(j, i)) s |= bit(j); });
    return s;
  }
  NodeSet adjacents(int i) const {
    NodeSet s = bid_[i] | dir_[i];
    for (int j = 0; j < d_; ++j)
      if (dir(j, i)) s |= bit(j);
    return s;
  }

  int edge_count() const {
    int n = 0;
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j < d_; ++j) {
        if (bid(i, j)) ++n;
        if (und(i, j)) ++n;
        else { if (dir(i, j)) ++n; if (dir(j, i)) ++n; }
      }
    return n;
  }

  bool operator==(const MixedGraph& o) const {
    return d_ == o.d_ && hybrid_ == o.hybrid_ && dir_ == o.dir_ && bid_ == o.bid_;
  }
  bool operator!=(const MixedGraph& o) const { return !(*this == o); }

  // Anteriors of S: nodes with a descending path to some member (directed
  // steps, plus undirected steps in hybrid mode). Contains S. In dmg mode
  // this is the ancestor set.
  NodeSet anteriors(NodeSet S) const {
    NodeSet closure = S;
    bool grew = true;
    while (grew) {
      grew = false;
      for (int p = 0; p < d_; ++p) {
        if (contains(closure, p)) continue;
        // dir_[p] holds p -> q and, in hybrid mode, p -- q steps.
        if (dir_[p] & closure) {
          closure |= bit(p);
          grew = true;
        }
      }
    }
    return closure;
  }

  bool has_directed_cycle() const {
    // Kahn peeling over strictly-directed reachability; in hybrid mode a
    // 2-cycle is an undirected edge, so use sdir there and full dir in dmg.
    std::vector<int> indeg(d_, 0);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        if (i != j && edge_for_cycle(i, j)) ++indeg[j];
    std::vector<int> stack;
    for (int v = 0; v < d_; ++v)
      if (indeg[v] == 0) stack.push_back(v);
    int seen = 0;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      ++seen;
      for (int j = 0; j < d_; ++j)
        if (v != j && edge_for_cycle(v, j) && --indeg[j] == 0) stack.push_back(j);
    }
    return seen != d_;
  }

  // Chain components: connected components of the undirected part. Singleton
  // components for dmg-mode graphs.
  std::vector<NodeSet> chain_components() const {
    std::vector<NodeSet> comps;
    NodeSet seen = 0;
    for (int v = 0; v < d_; ++v) {
      if (contains(seen, v)) continue;
      NodeSet comp = bit(v);
      bool grew = true;
      while (grew) {
        grew = false;
        NodeSet frontier = comp;
        for_each_node(frontier, [&](int u) {
          NodeSet nb = und_neighbors(u) & ~comp;
          if (nb) { comp |= nb; grew = true; }
        });
      }
      comps.push_back(comp);
      seen |= comp;
    }
    return comps;
  }

  // Partially directed cycle test for hybrid graphs: a strictly directed edge
  // inside a chain component, or a cycle in the component digraph.
  bool has_partially_directed_cycle() const {
    if (!hybrid_) throw std::invalid_argument("partially directed cycles are defined for hybrid graphs");
    auto comps = chain_components();
    std::vector<int> comp_of(d_, -1);
    for (int c = 0; c < static_cast<int>(comps.size()); ++c)
      for_each_node(comps[c], [&](int v) { comp_of[v] = c; });
    int nc = static_cast<int>(comps.size());
    std::vector<NodeSet> cadj(nc, 0);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        if (i == j || !sdir(i, j)) continue;
        if (comp_of[i] == comp_of[j]) return true;
        cadj[comp_of[i]] |= bit(comp_of[j]);
      }
    std::vector<int> indeg(nc, 0);
    for (int c = 0; c < nc; ++c)
      for_each_node(cadj[c], [&](int t) { ++indeg[t]; });
    std::vector<int> stack;
    for (int c = 0; c < nc; ++c)
      if (indeg[c] == 0) stack.push_back(c);
    int seen = 0;
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      ++seen;
      for_each_node(cadj[c], [&](int t) { if (--indeg[t] == 0) stack.push_back(t); });
    }
    return seen != nc;
  }

  bool valid(GraphClass cls) const {
    switch (cls) {
      case GraphClass::DG:
        return !hybrid_ && bid_empty();
      case GraphClass::DAG:
        return !hybrid_ && bid_empty() && !has_directed_cycle();
      case GraphClass::DMG:
        return !hybrid_;
      case GraphClass::ADMG:
        return !hybrid_ && !has_directed_cycle();
      case GraphClass::CHAIN:
        return hybrid_ && bid_empty() && !has_partially_directed_cycle();
    }
    return false;
  }

 private:
  bool edge_for_cycle(int i, int j) const { return hybrid_ ? sdir(i, j) : dir(i, j); }
  bool bid_empty() const {
    for (int i = 0; i < d_; ++i)
      if (bid_[i]) return false;
    return true;
  }
  void check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= d_ || j >= d_ || i == j)
      throw std::invalid_argument("invalid node pair");
  }

  int d_;
  bool hybrid_;
  std::vector<NodeSet> dir_;
  std::vector<NodeSet> bid_;
};

// Restriction to A without re-indexing: nodes outside A become isolated.
inline MixedGraph restrict_to(const MixedGraph& g, NodeSet A) {
  MixedGraph out(g.d(), g.hybrid());
  for (int i = 0; i < g.d(); ++i) {
    if (!contains(A, i)) continue;
    for (int j = 0; j < g.d(); ++j) {
      if (i == j || !contains(A, j)) continue;
      if (g.dir(i, j)) out.set_dir(i, j);
      if (!g.hybrid() && j > i && g.bid(i, j)) out.set_bid(i, j);
    }
  }
  return out;
}

// Induced subgraph with nodes re-indexed in ascending order of their old ids.
// Returns the graph and the old ids in new-index order.
inline std::pair<MixedGraph, std::vector<int>> induced_subgraph(const MixedGraph& g, NodeSet A) {
  std::vector<int> keep = to_nodes(A);
  MixedGraph out(static_cast<int>(keep.size()), g.hybrid());
  for (int a = 0; a < static_cast<int>(keep.size()); ++a)
    for (int b = 0; b < static_cast<int>(keep.size()); ++b) {
      if (a == b) continue;
      if (g.dir(keep[a], keep[b])) out.set_dir(a, b);
      if (!g.hybrid() && b > a && g.bid(keep[a], keep[b])) out.set_bid(a, b);
    }
  return {out, keep};
}

// Boundary of A: nodes with a strictly directed edge into A.
inline NodeSet boundary(const MixedGraph& g, NodeSet A) {
  NodeSet b = 0;
  for (int i = 0; i < g.d(); ++i) {
    if (contains(A, i)) continue;
    bool in = false;
    for_each_node(A, [&](int j) { if (g.sdir(i, j)) in = true; });
    if (in) b |= bit(i);
  }
  return b;
}

// Moral graph as an undirected (hybrid-mode) graph: adjacency in g, plus
// pairs sharing a chain component boundary. Only nodes in A participate.
inline MixedGraph moral_graph(const MixedGraph& g, NodeSet A) {
  MixedGraph m(g.d(), true);
  for (int i = 0; i < g.d(); ++i) {
    if (!contains(A, i)) continue;
    for (int j = i + 1; j < g.d(); ++j) {
      if (!contains(A, j)) continue;
      if (g.dir(i, j) || g.dir(j, i) || (!g.hybrid() && g.bid(i, j))) m.set_und(i, j);
    }
  }
  MixedGraph ga = restrict_to(g, A);
  for (NodeSet comp : ga.chain_components()) {
    if (!(comp & A)) continue;
    NodeSet bd = boundary(ga, comp) & A;
    auto nodes = to_nodes(bd);
    for (size_t a = 0; a < nodes.size(); ++a)
      for (size_t b = a + 1; b < nodes.size(); ++b) m.set_und(nodes[a], nodes[b]);
  }
  return m;
}

inline MixedGraph moral_graph(const MixedGraph& g) { return moral_graph(g, full_set(g.d())); }

// Latent projection of a DAG over L: keeps directed paths through L and adds
// i <-> j for common latent causes reachable through L.
inline MixedGraph latent_projection(const MixedGraph& dag, NodeSet L) {
  if (dag.hybrid()) throw std::invalid_argument("latent projection expects a dmg-mode graph");
  if (dag.has_directed_cycle()) throw std::invalid_argument("latent projection expects a DAG");
  int d = dag.d();
  NodeSet obs = full_set(d) & ~L;
  // reach_obs[s]: observed nodes reachable from s by directed paths whose
  // intermediate nodes are all latent (s itself excluded from the path).
  std::vector<NodeSet> reach_obs(d, 0);
  for (int s = 0; s < d; ++s) {
    NodeSet out = dag.children(s) & obs;
    NodeSet frontier = dag.children(s) & L;
    NodeSet seen_lat = frontier;
    while (frontier) {
      NodeSet next = 0;
      for_each_node(frontier, [&](int v) { next |= dag.children(v); });
      out |= next & obs;
      frontier = next & L & ~seen_lat;
      seen_lat |= frontier;
    }
    reach_obs[s] = out;
  }
  std::vector<int> old_of;
  std::vector<int> new_of(d, -1);
  for_each_node(obs, [&](int v) {
    new_of[v] = static_cast<int>(old_of.size());
    old_of.push_back(v);
  });
  MixedGraph out(static_cast<int>(old_of.size()), false);
  for_each_node(obs, [&](int i) {
    for_each_node(reach_obs[i] & obs, [&](int j) {
      if (i != j) out.set_dir(new_of[i], new_of[j]);
    });
  });
  for_each_node(L, [&](int a) {
    auto targets = to_nodes(reach_obs[a] & obs);
    for (size_t x = 0; x < targets.size(); ++x)
      for (size_t y = x + 1; y < targets.size(); ++y)
        out.set_bid(new_of[targets[x]], new_of[targets[y]]);
  });
  return out;
}

// Text format: "d=<n> mode=<dmg|hybrid>" header, then "i -> j", "i <-> j",
// "i -- j" lines with 1-based ids; '#' starts a comment.
inline std::string to_text(const MixedGraph& g) {
  std::ostringstream os;
  os << "d=" << g.d() << " mode=" << (g.hybrid() ? "hybrid" : "dmg") << "\n";
  for (int i = 0; i < g.d(); ++i)
    for (int j = 0; j < g.d(); ++j) {
      if (i == j) continue;
      if (g.hybrid()) {
        if (g.und(i, j) && i < j) os << (i + 1) << " -- " << (j + 1) << "\n";
        else if (g.sdir(i, j)) os << (i + 1) << " -> " << (j + 1) << "\n";
      } else {
        if (g.dir(i, j)) os << (i + 1) << " -> " << (j + 1) << "\n";
        if (j > i && g.bid(i, j)) os << (i + 1) << " <-> " << (j + 1) << "\n";
      }
    }
  return os.str();
}

inline MixedGraph graph_from_text(std::istream& in) {
  std::string line;
  int d = -1;
  bool hybrid = false;
  bool have_header = false;
  MixedGraph g;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (!have_header) {
      std::string tok;
      if (!(ls >> tok)) continue;
      std::string mode_tok;
      if (tok.rfind("d=", 0) != 0 || !(ls >> mode_tok) || mode_tok.rfind("mode=", 0) != 0)
        throw std::invalid_argument("graph text: expected 'd=<n> mode=<dmg|hybrid>' header");
      d = std::stoi(tok.substr(2));
      std::string mode = mode_tok.substr(5);
      if (mode == "hybrid") hybrid = true;
      else if (mode != "dmg") throw std::invalid_argument("graph text: unknown mode " + mode);
      check_node_count(d);
      g = MixedGraph(d, hybrid);
      have_header = true;
      continue;
    }
    int i, j;
    std::string op;
    if (!(ls >> i)) continue;
    if (!(ls >> op >> j)) throw std::invalid_argument("graph text: bad edge line " + std::to_string(lineno));
    if (i < 1 || j < 1 || i > d || j > d || i == j)
      throw std::invalid_argument("graph text: node out of range on line " + std::to_string(lineno));
    if (op == "->") g.set_dir(i - 1, j - 1);
    else if (op == "<->") g.set_bid(i - 1, j - 1);
    else if (op == "--") g.set_und(i - 1, j - 1);
    else throw std::invalid_argument("graph text: unknown edge op " + op);
  }
  if (!have_header) throw std::invalid_argument("graph text: missing header");
  return g;
}

inline MixedGraph graph_from_text(const std::string& s) {
  std::istringstream is(s);
  return graph_from_text(is);
}

}  // namespace glip
