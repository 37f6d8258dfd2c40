#pragma once

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "family.hpp"
#include "graph.hpp"
#include "separation.hpp"

namespace glip {

// Mark codes at the far end of an edge: 0 none, 1 circle (reserved),
// 2 head, 3 tail. marks[i][j] is the mark at j on the edge between i and j.
struct MarkedGraph {
  explicit MarkedGraph(int d) : marks_(d, std::vector<int>(d, 0)) {}

  int d() const { return static_cast<int>(marks_.size()); }
  int mark(int i, int j) const { return marks_[i][j]; }
  void set_mark(int i, int j, int m) {
    if (i == j) throw std::invalid_argument("self mark");
    if (m < 0 || m > 3) throw std::invalid_argument("bad mark code");
    marks_[i][j] = m;
  }
  bool adjacent(int i, int j) const { return marks_[i][j] != 0 && marks_[j][i] != 0; }

  void set_directed(int i, int j) {
    set_mark(i, j, 2);
    set_mark(j, i, 3);
  }
  void set_undirected(int i, int j) {
    set_mark(i, j, 3);
    set_mark(j, i, 3);
  }
  void set_bidirected(int i, int j) {
    set_mark(i, j, 2);
    set_mark(j, i, 2);
  }
  void clear_edge(int i, int j) {
    marks_[i][j] = 0;
    marks_[j][i] = 0;
  }

  bool operator==(const MarkedGraph& o) const { return marks_ == o.marks_; }

 private:
  std::vector<std::vector<int>> marks_;
};

inline MarkedGraph marked_from_mixed(const MixedGraph& g) {
  MarkedGraph m(g.d());
  for (int i = 0; i < g.d(); ++i)
    for (int j = i + 1; j < g.d(); ++j) {
      if (g.und(i, j)) m.set_undirected(i, j);
      else if (g.sdir(i, j)) m.set_directed(i, j);
      else if (g.sdir(j, i)) m.set_directed(j, i);
      if (g.bid(i, j)) {
        if (m.adjacent(i, j)) throw std::invalid_argument("mark matrix cannot hold multi-edges");
        m.set_bidirected(i, j);
      }
    }
  return m;
}

namespace detail {

// Meek orientation rules on a partially directed mark matrix.
// Returns true if any undirected edge was oriented.
inline bool meek_rule(MarkedGraph& m, int rule) {
  const int d = m.d();
  auto und = [&](int a, int b) { return m.mark(a, b) == 3 && m.mark(b, a) == 3; };
  auto dir = [&](int a, int b) { return m.mark(a, b) == 2 && m.mark(b, a) == 3; };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (a == b) continue;
      switch (rule) {
        case 1:
          // a -> b - c with a, c nonadjacent orients b -> c.
          for (int c = 0; c < d; ++c) {
            if (c == a || c == b) continue;
            if (dir(a, b) && und(b, c) && !m.adjacent(a, c)) {
              m.set_directed(b, c);
              return true;
            }
          }
          break;
        case 2:
          // a -> b -> c with a - c orients a -> c.
          for (int c = 0; c < d; ++c) {
            if (c == a || c == b) continue;
            if (dir(a, b) && dir(b, c) && und(a, c)) {
              m.set_directed(a, c);
              return true;
            }
          }
          break;
        case 3:
          // a - b, a - c, a - e, c -> b, e -> b, c and e nonadjacent orients a -> b.
          for (int c = 0; c < d; ++c) {
            if (c == a || c == b) continue;
            for (int e = c + 1; e < d; ++e) {
              if (e == a || e == b) continue;
              if (und(a, b) && und(a, c) && und(a, e) && dir(c, b) && dir(e, b) &&
                  !m.adjacent(c, e)) {
                m.set_directed(a, b);
                return true;
              }
            }
          }
          break;
        case 4:
          // a - b, a - c, c -> e, e -> b, c and b nonadjacent orients a -> b.
          for (int c = 0; c < d; ++c) {
            if (c == a || c == b) continue;
            for (int e = 0; e < d; ++e) {
              if (e == a || e == b || e == c) continue;
              if (und(a, b) && und(a, c) && dir(c, e) && dir(e, b) && !m.adjacent(c, b)) {
                m.set_directed(a, b);
                return true;
              }
            }
          }
          break;
        default: throw std::logic_error("bad meek rule");
      }
    }
  return false;
}

}  // namespace detail

inline void meek_closure(MarkedGraph& m, const std::vector<int>& order = {1, 2, 3, 4}) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r : order)
      while (detail::meek_rule(m, r)) changed = true;
  }
}

// Essential graph: skeleton, v-structures, then the Meek closure.
inline MarkedGraph cpdag_from_dag(const MixedGraph& g) {
  if (!g.valid(GraphClass::DAG)) throw std::invalid_argument("cpdag_from_dag needs a DAG");
  const int d = g.d();
  MarkedGraph m(d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (g.adjacent(i, j)) m.set_undirected(i, j);
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a) {
      if (a == b || !g.dir(a, b)) continue;
      for (int c = a + 1; c < d; ++c) {
        if (c == b || !g.dir(c, b)) continue;
        if (g.adjacent(a, c)) continue;
        m.set_directed(a, b);
        m.set_directed(c, b);
      }
    }
  meek_closure(m);
  return m;
}

inline int shd(const MarkedGraph& e, const MarkedGraph& o) {
  if (e.d() != o.d()) throw std::invalid_argument("dimension mismatch");
  int count = 0;
  for (int i = 0; i < e.d(); ++i)
    for (int j = 0; j < e.d(); ++j)
      if (e.mark(i, j) != o.mark(i, j)) ++count;
  return count;
}

// Ordered pairs i != j and conditioning sets of size at most k.
inline long k_sep_distance(const MixedGraph& e, const MixedGraph& o, Criterion crit, int k) {
  if (e.d() != o.d()) throw std::invalid_argument("dimension mismatch");
  const int d = e.d();
  if (k > d - 2) throw std::invalid_argument("k exceeds d-2");
  ConditioningFamily fam = family_k(d, k);
  long count = 0;
  for (NodeSet c : fam.sets)
    for (int i = 0; i < d; ++i) {
      if (contains(c, i)) continue;
      for (int j = 0; j < d; ++j) {
        if (j == i || contains(c, j)) continue;
        if (separated(e, i, j, c, crit) != separated(o, i, j, c, crit)) ++count;
      }
    }
  return count;
}

struct F1Scores {
  double head_fdr, head_fnr, head_f1;
  double tail_fdr, tail_fnr, tail_f1;
};

namespace detail {

inline double f1_from_rates(double fdr, double fnr) {
  double den = 2 - fdr - fnr;
  if (den <= 0) return 0;
  return 2 * (1 - fdr) * (1 - fnr) / den;
}

}  // namespace detail

// Row-averaged FDR/FNR over one mark code; tails use the transposed matrices.
inline F1Scores f1_scores(const MarkedGraph& e, const MarkedGraph& o) {
  if (e.d() != o.d()) throw std::invalid_argument("dimension mismatch");
  const int d = e.d();
  auto rates = [&](int code, bool transposed) {
    double fdr = 0, fnr = 0;
    for (int i = 0; i < d; ++i) {
      int tp = 0, fp = 0, fn = 0;
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        bool em = (transposed ? e.mark(j, i) : e.mark(i, j)) == code;
        bool om = (transposed ? o.mark(j, i) : o.mark(i, j)) == code;
        if (em && om) ++tp;
        else if (em) ++fp;
        else if (om) ++fn;
      }
      fdr += static_cast<double>(fp) / std::max(tp + fp, 1);
      fnr += static_cast<double>(fn) / std::max(tp + fn, 1);
    }
    return std::pair<double, double>{fdr / d, fnr / d};
  };
  F1Scores s{};
  auto [hfdr, hfnr] = rates(2, false);
  s.head_fdr = hfdr;
  s.head_fnr = hfnr;
  s.head_f1 = detail::f1_from_rates(hfdr, hfnr);
  auto [tfdr, tfnr] = rates(3, true);
  s.tail_fdr = tfdr;
  s.tail_fnr = tfnr;
  s.tail_f1 = detail::f1_from_rates(tfdr, tfnr);
  return s;
}

inline void write_marked(const MarkedGraph& m, std::ostream& os) {
  os << "d=" << m.d() << "\n";
  for (int i = 0; i < m.d(); ++i) {
    for (int j = 0; j < m.d(); ++j) {
      if (j) os << ",";
      os << m.mark(i, j);
    }
    os << "\n";
  }
}

inline MarkedGraph read_marked(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("d=", 0) != 0)
    throw std::invalid_argument("marked graph file must start with d=<n>");
  int d = std::atoi(line.c_str() + 2);
  check_node_count(d);
  MarkedGraph m(d);
  for (int i = 0; i < d; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("truncated marked graph file");
    std::stringstream ss(line);
    std::string cell;
    for (int j = 0; j < d; ++j) {
      if (!std::getline(ss, cell, ',')) throw std::invalid_argument("short row in marked graph file");
      int v = std::atoi(cell.c_str());
      if (i == j) {
        if (v != 0) throw std::invalid_argument("nonzero diagonal mark");
      } else {
        m.set_mark(i, j, v);
      }
    }
  }
  return m;
}

}  // namespace glip
