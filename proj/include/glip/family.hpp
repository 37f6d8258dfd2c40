#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "glip/bits.hpp"

namespace glip {

// Homogeneous collection of conditioning sets, ordered by size then by mask.
struct ConditioningFamily {
  int d = 0;
  std::vector<NodeSet> sets;
};

// All subsets of [d] with at most k elements. k = d - 2 is the largest bound
// that leaves a testable pair outside every set.
inline ConditioningFamily family_k(int d, int k) {
  check_node_count(d);
  if (k < 0 || k > d - 2) throw std::invalid_argument("family size bound out of range");
  ConditioningFamily fam;
  fam.d = d;
  fam.sets.push_back(0);
  for (int m = 1; m <= k; ++m) {
    std::uint64_t s = (std::uint64_t(1) << m) - 1;
    const std::uint64_t top = full_set(d);
    while (s <= top) {
      fam.sets.push_back(static_cast<NodeSet>(s));
      std::uint64_t c = s & (~s + 1);
      std::uint64_t r = s + c;
      s = (((r ^ s) >> 2) / c) | r;
    }
  }
  return fam;
}

inline ConditioningFamily family_full(int d) { return family_k(d, d - 2); }

// Triples scored by the objective: pairs i < j with both endpoints outside C.
inline int triple_count(const ConditioningFamily& fam) {
  int n = 0;
  for (NodeSet C : fam.sets) {
    int free_nodes = fam.d - popcount(C);
    n += free_nodes * (free_nodes - 1) / 2;
  }
  return n;
}

}  // namespace glip
