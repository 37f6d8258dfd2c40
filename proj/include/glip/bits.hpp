#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace glip {

// Node sets over at most 32 nodes, bit v = node v (0-based).
using NodeSet = std::uint32_t;

inline constexpr int kMaxNodes = 32;

inline constexpr NodeSet bit(int v) { return NodeSet{1} << v; }

inline constexpr bool contains(NodeSet s, int v) { return (s >> v) & 1u; }

inline constexpr int popcount(NodeSet s) { return std::popcount(s); }

inline constexpr NodeSet full_set(int d) {
  return d == kMaxNodes ? ~NodeSet{0} : (NodeSet{1} << d) - 1;
}

// Lowest set bit index; undefined for empty sets.
inline int first_node(NodeSet s) { return std::countr_zero(s); }

template <typename F>
inline void for_each_node(NodeSet s, F&& f) {
  while (s) {
    int v = std::countr_zero(s);
    f(v);
    s &= s - 1;
  }
}

inline std::vector<int> to_nodes(NodeSet s) {
  std::vector<int> out;
  for_each_node(s, [&](int v) { out.push_back(v); });
  return out;
}

// Lowercase hex, at least two digits, as used in variable/row names.
inline std::string mask_hex(NodeSet s) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  do {
    out.insert(out.begin(), digits[s & 0xf]);
    s >>= 4;
  } while (s);
  if (out.size() < 2) out.insert(out.begin(), '0');
  return out;
}

inline void check_node_count(int d) {
  if (d < 1 || d > kMaxNodes)
    throw std::invalid_argument("node count must be in [1, " + std::to_string(kMaxNodes) + "], got " +
                                std::to_string(d));
}

}  // namespace glip
