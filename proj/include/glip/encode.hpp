#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bits.hpp"
#include "family.hpp"
#include "graph.hpp"
#include "milp.hpp"
#include "pvalues.hpp"
#include "separation.hpp"

namespace glip {

// Distance system used by the encoding. D and C bound walk length by d - 1,
// DC and MC by the collider-limited cap, which keeps candidate counts per
// triple independent of the conditioning set structure.
enum class EncodingKind { D, DC, M, MC, C };

inline const char* to_string(EncodingKind e) {
  switch (e) {
    case EncodingKind::D: return "d";
    case EncodingKind::DC: return "dc";
    case EncodingKind::M: return "m";
    case EncodingKind::MC: return "mc";
    case EncodingKind::C: return "c";
  }
  throw std::logic_error("bad encoding");
}

inline EncodingKind encoding_from_string(const std::string& s) {
  if (s == "d") return EncodingKind::D;
  if (s == "dc") return EncodingKind::DC;
  if (s == "m") return EncodingKind::M;
  if (s == "mc") return EncodingKind::MC;
  if (s == "c") return EncodingKind::C;
  throw std::invalid_argument("unknown encoding: " + s);
}

inline bool encoding_valid(GraphClass cls, EncodingKind e) {
  switch (cls) {
    case GraphClass::DAG:
    case GraphClass::DG: return e == EncodingKind::D || e == EncodingKind::DC;
    case GraphClass::ADMG:
    case GraphClass::DMG: return e == EncodingKind::M || e == EncodingKind::MC;
    case GraphClass::CHAIN: return e == EncodingKind::C;
  }
  throw std::logic_error("bad class");
}

inline Criterion oracle_criterion(EncodingKind e) {
  switch (e) {
    case EncodingKind::D: return Criterion::D;
    case EncodingKind::DC: return Criterion::MC;
    case EncodingKind::M: return Criterion::M;
    case EncodingKind::MC: return Criterion::MC;
    case EncodingKind::C: return Criterion::C_SEP;
  }
  throw std::logic_error("bad encoding");
}

// Longest encoded walk length a; distance variables range over [1, a + 1].
inline int distance_cap(EncodingKind e, int d) {
  return (e == EncodingKind::DC || e == EncodingKind::MC) ? mc_walk_cap(d) : d - 1;
}

// Variable names use 1-based node ids and hex conditioning masks.
namespace vn {

inline std::string pr(int i, int j) {
  return std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

inline std::string xd(int i, int j) { return "x_d_" + pr(i, j); }
inline std::string xb(int i, int j) { return "x_b_" + pr(std::min(i, j), std::max(i, j)); }
inline std::string xs(int i, int j) { return "x_s_" + pr(i, j); }
inline std::string lant(int i, int j) { return "l_ant_" + pr(i, j); }
inline std::string dn(int i, int j) { return "dn_" + pr(i, j); }
inline std::string dnc(int i, NodeSet c) { return "dnc_" + std::to_string(i + 1) + "_c" + mask_hex(c); }
inline std::string lm(int i, int j, NodeSet c) {
  return "l_m_" + pr(std::min(i, j), std::max(i, j)) + "_c" + mask_hex(c);
}
inline std::string z(int i, int j, NodeSet c) {
  return "z_" + pr(std::min(i, j), std::max(i, j)) + "_c" + mask_hex(c);
}
inline std::string lbid(int i, int j, NodeSet c) {
  return "l_bid_" + pr(std::min(i, j), std::max(i, j)) + "_c" + mask_hex(c);
}
inline std::string zbid(int i, int j, NodeSet c) {
  return "z_bid_" + pr(std::min(i, j), std::max(i, j)) + "_c" + mask_hex(c);
}
inline std::string lsb(int i, int j, NodeSet c) { return "l_sb_" + pr(i, j) + "_c" + mask_hex(c); }
inline std::string lu(int i, int j) { return "l_u_" + pr(std::min(i, j), std::max(i, j)); }
inline std::string zu(int i, int j) { return "z_u_" + pr(std::min(i, j), std::max(i, j)); }

}  // namespace vn

struct EncodeOptions {
  bool reduced = false;
};

namespace detail {

inline std::string rname(const char* tag, int i, int j) {
  return std::string(tag) + "_" + vn::pr(i, j);
}

inline std::string rname(const char* tag, int i, int j, NodeSet c) {
  return std::string(tag) + "_" + vn::pr(i, j) + "_c" + mask_hex(c);
}

inline std::string with_k(std::string base, int k) {
  return base + "_k" + std::to_string(k + 1);
}

struct Encoder {
  MilpProgram& p;
  int d;
  GraphClass cls;
  EncodingKind enc;
  const ConditioningFamily& fam;
  bool reduced;
  int a;

  int v(const std::string& name) const { return p.lookup(name); }

  // Ra rows for every i outside the mask; for the chain encoding Rb pins the
  // inside variables to 0 because I3 references them.
  void emit_dnc_for_mask(NodeSet c) {
    for (int i = 0; i < d; ++i) {
      if (contains(c, i)) {
        if (cls == GraphClass::CHAIN) p.add_var(vn::dnc(i, c), VarType::BINARY, 0, 0);
        continue;
      }
      if (c == 0) {
        p.add_var(vn::dnc(i, c), VarType::BINARY, 1, 1);
        continue;
      }
      int t = p.add_var(vn::dnc(i, c), VarType::BINARY, 0, 1);
      std::vector<Affine> cands;
      std::vector<Term> agg{{t, 1}};
      int n = 0;
      for_each_node(c, [&](int k) {
        int dnv = v(vn::dn(i, k));
        p.add_row(with_k("Ra_" + std::to_string(i + 1) + "_c" + mask_hex(c), k),
                  {{t, 1}, {dnv, -1}}, Sense::LE, 0);
        cands.push_back(affine_var(dnv));
        agg.push_back({dnv, -1});
        ++n;
      });
      p.add_row("Ra_" + std::to_string(i + 1) + "_c" + mask_hex(c) + "_ge", std::move(agg),
                Sense::GE, 1 - n);
      register_system(p, EqSystem::Kind::MIN, t, std::move(cands), 1, 4);
    }
  }

  void ensure_dnc(NodeSet c) {
    if (p.find_var(vn::dnc(first_node(~c & full_set(d)), c)) < 0) emit_dnc_for_mask(c);
  }

  // x*(i, j) = max(x->(i, j), x<->(i, j)), exact for binaries.
  void emit_consistency() {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        int s = v(vn::xs(i, j)), xd = v(vn::xd(i, j)), xb = v(vn::xb(i, j));
        p.add_row(rname("C6", i, j), {{s, 1}, {xd, -1}, {xb, -1}}, Sense::LE, 0);
        p.add_row(rname("C7", i, j), {{s, 1}, {xd, -1}}, Sense::GE, 0);
        register_system(p, EqSystem::Kind::MAX, s,
                        {affine_var(xd), affine_var(xb)}, std::nullopt, 1);
      }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        int xb = v(vn::xb(i, j));
        p.add_row(rname("C8", i, j), {{xb, 1}, {v(vn::xs(i, j)), -1}}, Sense::LE, 0);
        p.add_row(rname("C9", i, j), {{xb, 1}, {v(vn::xs(j, i)), -1}}, Sense::LE, 0);
      }
  }

  void emit_anterior() {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        std::vector<std::pair<std::string, Affine>> cands;
        cands.emplace_back(rname("D1", i, j),
                           affine_var(v(vn::xd(i, j)), -(d - 1), d));
        for (int k = 0; k < d; ++k) {
          if (k == i || k == j) continue;
          Affine e;
          e.constant = d - 1;
          e.add(v(vn::lant(i, k)), 1);
          e.add(v(vn::xd(k, j)), -(d - 2));
          cands.emplace_back(with_k(rname("D2", i, j), k), std::move(e));
        }
        emit_min_equality(p, "N1_" + vn::pr(i, j), v(vn::lant(i, j)), cands, std::nullopt, 2);
      }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        int l = v(vn::lant(i, j)), n = v(vn::dn(i, j));
        p.add_row(rname("C2", i, j), {{l, 1}, {n, -1}}, Sense::LE, d - 1);
        p.add_row(rname("C3", i, j), {{l, 1}, {n, -(d - 1)}}, Sense::GE, 1);
        register_link(p, n, l, d, 3, 1);
      }
  }

  void emit_chain_structure() {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        std::vector<std::pair<std::string, Affine>> cands;
        Affine u1;
        u1.constant = 2 * d - 1;
        u1.add(v(vn::xd(i, j)), -(d - 1));
        u1.add(v(vn::xd(j, i)), -(d - 1));
        cands.emplace_back(rname("U1", i, j), std::move(u1));
        for (int k = 0; k < d; ++k) {
          if (k == i || k == j) continue;
          Affine u2;
          u2.constant = 2 * d - 3;
          u2.add(v(vn::lu(i, k)), 1);
          u2.add(v(vn::xd(j, k)), -(d - 2));
          u2.add(v(vn::xd(k, j)), -(d - 2));
          cands.emplace_back(with_k(rname("U2", i, j), k), std::move(u2));
        }
        emit_min_equality(p, "W1_" + vn::pr(i, j), v(vn::lu(i, j)), cands, d, 5);
        int l = v(vn::lu(i, j)), z = v(vn::zu(i, j));
        p.add_row(rname("C12", i, j), {{z, 1}, {l, 1}}, Sense::LE, d);
        p.add_row(rname("C13", i, j), {{z, d - 1}, {l, 1}}, Sense::GE, d);
        register_link(p, z, l, d, 6);
      }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        std::vector<Term> t{{v(vn::lant(i, j)), 1},
                            {v(vn::lant(j, i)), -1},
                            {v(vn::dn(i, j)), d - 1},
                            {v(vn::dn(j, i)), d - 1}};
        p.add_row(rname("CHa", i, j), std::move(t), Sense::GE, 0);
        std::vector<Term> t2{{v(vn::lant(j, i)), 1},
                             {v(vn::lant(i, j)), -1},
                             {v(vn::dn(i, j)), d - 1},
                             {v(vn::dn(j, i)), d - 1}};
        p.add_row(rname("CHb", i, j), std::move(t2), Sense::GE, 0);
      }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        std::vector<std::pair<std::string, Affine>> cands;
        Affine y1;
        y1.add(v(vn::xd(i, j)), 1);
        y1.add(v(vn::xd(j, i)), -1);
        cands.emplace_back(rname("Y1", i, j), std::move(y1));
        for (int k = 0; k < d; ++k) {
          if (k == i || k == j) continue;
          Affine y2;
          y2.constant = -1;
          y2.add(v(vn::xd(i, k)), 1);
          y2.add(v(vn::xd(k, i)), -1);
          y2.add(v(vn::zu(k, j)), 1);
          cands.emplace_back(with_k(rname("Y2", i, j), k), std::move(y2));
        }
        emit_max_equality(p, "Z1_" + vn::pr(i, j), v(vn::xs(i, j)), cands, 0, 7);
      }
  }

  void emit_acyclicity() {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        p.add_row(rname("AC", i, j), {{v(vn::dn(i, j)), 1}, {v(vn::dn(j, i)), 1}}, Sense::GE, 1);
  }

  void emit_bidirected(bool with_z) {
    for (NodeSet c : fam.sets)
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
          std::vector<std::pair<std::string, Affine>> cands;
          if (contains(c, i) && contains(c, j)) {
            cands.emplace_back(rname("F1", i, j, c),
                               affine_var(v(vn::xb(i, j)), -(d - 1), d));
            for_each_node(c, [&](int k) {
              if (k == i || k == j) return;
              Affine e;
              e.constant = d - 1;
              e.add(v(vn::lbid(i, k, c)), 1);
              e.add(v(vn::xb(j, k)), -(d - 2));
              cands.emplace_back(with_k(rname("F2", i, j, c), k), std::move(e));
            });
          }
          emit_min_equality(p, "O1_" + vn::pr(i, j) + "_c" + mask_hex(c),
                            v(vn::lbid(i, j, c)), cands, d, 8);
          if (with_z) {
            int l = v(vn::lbid(i, j, c)), z = v(vn::zbid(i, j, c));
            p.add_row(rname("C10", i, j, c), {{z, 1}, {l, 1}}, Sense::LE, d);
            p.add_row(rname("C11", i, j, c), {{z, d - 1}, {l, 1}}, Sense::GE, d);
            register_link(p, z, l, d, 9);
          }
        }
  }

  void emit_semi_bidirected() {
    for (NodeSet c : fam.sets)
      for (int i = 0; i < d; ++i) {
        if (contains(c, i)) continue;
        for_each_node(c, [&](int j) {
          std::vector<std::pair<std::string, Affine>> cands;
          cands.emplace_back(rname("E1", i, j, c),
                             affine_var(v(vn::xs(i, j)), -(d - 1), d));
          for_each_node(c, [&](int k) {
            if (k == j) return;
            Affine e;
            e.constant = d - 1;
            e.add(v(vn::lbid(k, j, c)), 1);
            e.add(v(vn::xs(i, k)), -(d - 2));
            cands.emplace_back(with_k(rname("E2", i, j, c), k), std::move(e));
          });
          emit_min_equality(p, "G1_" + vn::pr(i, j) + "_c" + mask_hex(c),
                            v(vn::lsb(i, j, c)), cands, std::nullopt, 10);
        });
      }
  }

  void main_candidates_d(std::vector<std::pair<std::string, Affine>>& cands, int i, int j,
                         NodeSet c) {
    cands.emplace_back(rname("L1a", i, j, c), affine_var(v(vn::xd(i, j)), -(d - 1), d));
    cands.emplace_back(rname("L1b", i, j, c), affine_var(v(vn::xd(j, i)), -(d - 1), d));
    for (int k = 0; k < d; ++k) {
      if (k == i || k == j) continue;
      if (contains(c, k)) {
        Affine e;
        e.constant = 2 * d - 2;
        e.add(v(vn::xd(i, k)), -(d - 2));
        e.add(v(vn::xd(j, k)), -(d - 2));
        cands.emplace_back(with_k(rname("L3", i, j, c), k), std::move(e));
        continue;
      }
      if (!reduced) {
        Affine e2a;
        e2a.constant = d - 1;
        e2a.add(v(vn::lm(i, k, c)), 1);
        e2a.add(v(vn::xd(k, j)), -(d - 2));
        cands.emplace_back(with_k(rname("L2a", i, j, c), k), std::move(e2a));
        Affine e2b;
        e2b.constant = d - 1;
        e2b.add(v(vn::lm(j, k, c)), 1);
        e2b.add(v(vn::xd(k, i)), -(d - 2));
        cands.emplace_back(with_k(rname("L2b", i, j, c), k), std::move(e2b));
      }
      NodeSet mask = reduced ? (c | bit(i) | bit(j)) : c;
      if (reduced) ensure_dnc(mask);
      Affine e4;
      e4.add(v(vn::lm(i, k, c)), 1);
      e4.add(v(vn::lm(k, j, c)), 1);
      e4.add(v(vn::dnc(k, mask)), d - 2);
      cands.emplace_back(with_k(rname(reduced ? "L4m" : "L4", i, j, c), k), std::move(e4));
    }
  }

  void main_candidates_dc(std::vector<std::pair<std::string, Affine>>& cands, int i, int j,
                          NodeSet c) {
    cands.emplace_back(rname("L1ac", i, j, c), affine_var(v(vn::xd(i, j)), -a, a + 1));
    cands.emplace_back(rname("L1bc", i, j, c), affine_var(v(vn::xd(j, i)), -a, a + 1));
    NodeSet out = ~(c | bit(i) | bit(j)) & full_set(d);
    for_each_node(out, [&](int k) {
      Affine e2a;
      e2a.constant = a;
      e2a.add(v(vn::lm(i, k, c)), 1);
      e2a.add(v(vn::xd(k, j)), -(a - 1));
      cands.emplace_back(with_k(rname("L2ac", i, j, c), k), std::move(e2a));
      Affine e2b;
      e2b.constant = a;
      e2b.add(v(vn::lm(j, k, c)), 1);
      e2b.add(v(vn::xd(k, i)), -(a - 1));
      cands.emplace_back(with_k(rname("L2bc", i, j, c), k), std::move(e2b));
    });
    for_each_node(c, [&](int k) {
      Affine e3;
      e3.constant = 2 * a;
      e3.add(v(vn::xd(i, k)), -(a - 1));
      e3.add(v(vn::xd(j, k)), -(a - 1));
      cands.emplace_back(with_k(rname("L3c", i, j, c), k), std::move(e3));
      for_each_node(out, [&](int l) {
        Affine e4a;
        e4a.constant = 2 * a - 2;
        e4a.add(v(vn::lm(j, l, c)), 1);
        e4a.add(v(vn::xd(i, k)), -(a - 2));
        e4a.add(v(vn::xd(l, k)), -(a - 2));
        cands.emplace_back(with_k(rname("L4ac", i, j, c), k) + "_l" + std::to_string(l + 1),
                           std::move(e4a));
        Affine e4b;
        e4b.constant = 2 * a - 2;
        e4b.add(v(vn::lm(i, l, c)), 1);
        e4b.add(v(vn::xd(j, k)), -(a - 2));
        e4b.add(v(vn::xd(l, k)), -(a - 2));
        cands.emplace_back(with_k(rname("L4bc", i, j, c), k) + "_l" + std::to_string(l + 1),
                           std::move(e4b));
        for_each_node(out, [&](int m) {
          Affine e5;
          e5.constant = 2 * a - 4;
          e5.add(v(vn::lm(i, l, c)), 1);
          e5.add(v(vn::lm(m, j, c)), 1);
          e5.add(v(vn::xd(l, k)), -(a - 3));
          e5.add(v(vn::xd(m, k)), -(a - 3));
          cands.emplace_back(with_k(rname("L5c", i, j, c), k) + "_l" + std::to_string(l + 1) +
                                 "_m" + std::to_string(m + 1),
                             std::move(e5));
        });
      });
    });
  }

  void main_candidates_m(std::vector<std::pair<std::string, Affine>>& cands, int i, int j,
                         NodeSet c) {
    cands.emplace_back(rname("K1a", i, j, c), affine_var(v(vn::xs(i, j)), -(d - 1), d));
    cands.emplace_back(rname("K1b", i, j, c), affine_var(v(vn::xs(j, i)), -(d - 1), d));
    for (int k = 0; k < d; ++k) {
      if (k == i || k == j) continue;
      if (contains(c, k)) {
        Affine e3;
        e3.add(v(vn::lsb(i, k, c)), 1);
        e3.add(v(vn::lsb(j, k, c)), 1);
        cands.emplace_back(with_k(rname("K3", i, j, c), k), std::move(e3));
        continue;
      }
      Affine e2a;
      e2a.constant = d - 1;
      e2a.add(v(vn::lm(i, k, c)), 1);
      e2a.add(v(vn::xd(k, j)), -(d - 2));
      cands.emplace_back(with_k(rname("K2a", i, j, c), k), std::move(e2a));
      Affine e2b;
      e2b.constant = d - 1;
      e2b.add(v(vn::lm(j, k, c)), 1);
      e2b.add(v(vn::xd(k, i)), -(d - 2));
      cands.emplace_back(with_k(rname("K2b", i, j, c), k), std::move(e2b));
      Affine e4;
      e4.add(v(vn::lm(i, k, c)), 1);
      e4.add(v(vn::lm(k, j, c)), 1);
      e4.add(v(vn::dnc(k, c)), d - 2);
      cands.emplace_back(with_k(rname("K4", i, j, c), k), std::move(e4));
    }
  }

  void main_candidates_mc(std::vector<std::pair<std::string, Affine>>& cands, int i, int j,
                          NodeSet c) {
    cands.emplace_back(rname("K1ac", i, j, c), affine_var(v(vn::xs(i, j)), -a, a + 1));
    cands.emplace_back(rname("K1bc", i, j, c), affine_var(v(vn::xs(j, i)), -a, a + 1));
    NodeSet out = ~(c | bit(i) | bit(j)) & full_set(d);
    for_each_node(out, [&](int k) {
      Affine e2a;
      e2a.constant = a;
      e2a.add(v(vn::lm(i, k, c)), 1);
      e2a.add(v(vn::xd(k, j)), -(a - 1));
      cands.emplace_back(with_k(rname("K2ac", i, j, c), k), std::move(e2a));
      Affine e2b;
      e2b.constant = a;
      e2b.add(v(vn::lm(j, k, c)), 1);
      e2b.add(v(vn::xd(k, i)), -(a - 1));
      cands.emplace_back(with_k(rname("K2bc", i, j, c), k), std::move(e2b));
    });
    for_each_node(c, [&](int k) {
      Affine e3a;
      e3a.constant = 2 * a;
      e3a.add(v(vn::xs(i, k)), -(a - 1));
      e3a.add(v(vn::xs(j, k)), -(a - 1));
      cands.emplace_back(with_k(rname("K3ac", i, j, c), k), std::move(e3a));
      for_each_node(out, [&](int l) {
        Affine e4a;
        e4a.constant = 2 * a - 2;
        e4a.add(v(vn::lm(j, l, c)), 1);
        e4a.add(v(vn::xs(i, k)), -(a - 2));
        e4a.add(v(vn::xd(l, k)), -(a - 2));
        cands.emplace_back(with_k(rname("K4ac", i, j, c), k) + "_l" + std::to_string(l + 1),
                           std::move(e4a));
        Affine e4b;
        e4b.constant = 2 * a - 2;
        e4b.add(v(vn::lm(i, l, c)), 1);
        e4b.add(v(vn::xs(j, k)), -(a - 2));
        e4b.add(v(vn::xd(l, k)), -(a - 2));
        cands.emplace_back(with_k(rname("K4bc", i, j, c), k) + "_l" + std::to_string(l + 1),
                           std::move(e4b));
        for_each_node(out, [&](int m) {
          Affine e5a;
          e5a.constant = 2 * a - 4;
          e5a.add(v(vn::lm(i, l, c)), 1);
          e5a.add(v(vn::lm(m, j, c)), 1);
          e5a.add(v(vn::xd(l, k)), -(a - 3));
          e5a.add(v(vn::xd(m, k)), -(a - 3));
          cands.emplace_back(with_k(rname("K5ac", i, j, c), k) + "_l" + std::to_string(l + 1) +
                                 "_m" + std::to_string(m + 1),
                             std::move(e5a));
        });
      });
    });
    for_each_node(c, [&](int k1) {
      for_each_node(c, [&](int k2) {
        if (k1 == k2) return;
        std::string kk = "_k" + std::to_string(k1 + 1) + "_" + std::to_string(k2 + 1);
        Affine e3b;
        e3b.constant = 3 * a - 4;
        e3b.add(v(vn::lbid(k1, k2, c)), 1);
        e3b.add(v(vn::xs(i, k1)), -(a - 2));
        e3b.add(v(vn::zbid(k1, k2, c)), -(a - 2));
        e3b.add(v(vn::xs(j, k2)), -(a - 2));
        cands.emplace_back(rname("K3bc", i, j, c) + kk, std::move(e3b));
        for_each_node(out, [&](int l) {
          Affine e4c;
          e4c.constant = 3 * a - 7;
          e4c.add(v(vn::lm(j, l, c)), 1);
          e4c.add(v(vn::lbid(k1, k2, c)), 1);
          e4c.add(v(vn::xs(i, k1)), -(a - 3));
          e4c.add(v(vn::zbid(k1, k2, c)), -(a - 3));
          e4c.add(v(vn::xd(l, k2)), -(a - 3));
          cands.emplace_back(rname("K4cc", i, j, c) + kk + "_l" + std::to_string(l + 1),
                             std::move(e4c));
          Affine e4d;
          e4d.constant = 3 * a - 7;
          e4d.add(v(vn::lm(i, l, c)), 1);
          e4d.add(v(vn::lbid(k1, k2, c)), 1);
          e4d.add(v(vn::xs(j, k1)), -(a - 3));
          e4d.add(v(vn::zbid(k1, k2, c)), -(a - 3));
          e4d.add(v(vn::xd(l, k2)), -(a - 3));
          cands.emplace_back(rname("K4dc", i, j, c) + kk + "_l" + std::to_string(l + 1),
                             std::move(e4d));
          for_each_node(out, [&](int m) {
            Affine e5b;
            e5b.constant = 3 * a - 10;
            e5b.add(v(vn::lm(i, l, c)), 1);
            e5b.add(v(vn::lbid(k1, k2, c)), 1);
            e5b.add(v(vn::lm(m, j, c)), 1);
            e5b.add(v(vn::xd(l, k1)), -(a - 4));
            e5b.add(v(vn::zbid(k1, k2, c)), -(a - 4));
            e5b.add(v(vn::xd(m, k2)), -(a - 4));
            cands.emplace_back(rname("K5bc", i, j, c) + kk + "_l" + std::to_string(l + 1) +
                                   "_m" + std::to_string(m + 1),
                               std::move(e5b));
          });
        });
      });
    });
  }

  void main_candidates_c(std::vector<std::pair<std::string, Affine>>& cands, int i, int j,
                         NodeSet c) {
    cands.emplace_back(rname("I1a", i, j, c), affine_var(v(vn::xd(i, j)), -(d - 1), d));
    cands.emplace_back(rname("I1b", i, j, c), affine_var(v(vn::xd(j, i)), -(d - 1), d));
    for (int k = 0; k < d; ++k) {
      if (k == i || k == j) continue;
      Affine e3;
      e3.constant = 2 * d - 1;
      e3.add(v(vn::xs(i, k)), -(d - 1));
      e3.add(v(vn::xs(j, k)), -(d - 1));
      e3.add(v(vn::dnc(k, c)), d - 1);
      cands.emplace_back(with_k(rname("I3", i, j, c), k), std::move(e3));
      if (contains(c, k)) continue;
      Affine e2a;
      e2a.constant = d - 1;
      e2a.add(v(vn::lm(i, k, c)), 1);
      e2a.add(v(vn::xd(k, j)), -(d - 2));
      cands.emplace_back(with_k(rname("I2a", i, j, c), k), std::move(e2a));
      Affine e2b;
      e2b.constant = d - 1;
      e2b.add(v(vn::lm(j, k, c)), 1);
      e2b.add(v(vn::xd(k, i)), -(d - 2));
      cands.emplace_back(with_k(rname("I2b", i, j, c), k), std::move(e2b));
      Affine e4;
      e4.add(v(vn::lm(i, k, c)), 1);
      e4.add(v(vn::lm(k, j, c)), 1);
      e4.add(v(vn::dnc(k, c)), d - 2);
      cands.emplace_back(with_k(rname("I4", i, j, c), k), std::move(e4));
    }
  }

  void emit_main() {
    const char* sys_tag = enc == EncodingKind::D ? (reduced ? "M1m" : "M1")
                          : enc == EncodingKind::DC ? "M1c"
                          : enc == EncodingKind::M ? "P1"
                          : enc == EncodingKind::MC ? "P1c"
                                                    : "Q1";
    for (NodeSet c : fam.sets)
      for (int i = 0; i < d; ++i) {
        if (contains(c, i)) continue;
        for (int j = i + 1; j < d; ++j) {
          if (contains(c, j)) continue;
          std::vector<std::pair<std::string, Affine>> cands;
          switch (enc) {
            case EncodingKind::D: main_candidates_d(cands, i, j, c); break;
            case EncodingKind::DC: main_candidates_dc(cands, i, j, c); break;
            case EncodingKind::M: main_candidates_m(cands, i, j, c); break;
            case EncodingKind::MC: main_candidates_mc(cands, i, j, c); break;
            case EncodingKind::C: main_candidates_c(cands, i, j, c); break;
          }
          emit_min_equality(p, std::string(sys_tag) + "_" + vn::pr(i, j) + "_c" + mask_hex(c),
                            v(vn::lm(i, j, c)), cands, std::nullopt, 11);
          int l = v(vn::lm(i, j, c)), z = v(vn::z(i, j, c));
          p.add_row(rname("C4", i, j, c), {{z, 1}, {l, 1}}, Sense::LE, a + 1);
          p.add_row(rname("C5", i, j, c), {{z, a}, {l, 1}}, Sense::GE, a + 1);
          register_link(p, z, l, a + 1, 12);
        }
      }
  }
};

}  // namespace detail

inline MilpProgram build_program(int d, GraphClass cls, EncodingKind enc,
                                 const ConditioningFamily& fam, EncodeOptions opt = {}) {
  check_node_count(d);
  if (d < 2) throw std::invalid_argument("need at least two nodes");
  if (fam.d != d) throw std::invalid_argument("family node count mismatch");
  if (!encoding_valid(cls, enc))
    throw std::invalid_argument(std::string("encoding ") + to_string(enc) +
                                " not valid for class " + to_string(cls));
  if (opt.reduced && enc != EncodingKind::D)
    throw std::invalid_argument("reduced variant requires the d encoding");
  for (NodeSet c : fam.sets)
    if ((c & ~full_set(d)) != 0) throw std::invalid_argument("conditioning set out of range");

  MilpProgram p;
  const bool chain = cls == GraphClass::CHAIN;
  const bool has_xb = cls == GraphClass::ADMG || cls == GraphClass::DMG;
  const bool has_xs = has_xb || chain;
  const bool has_anterior = enc == EncodingKind::D || enc == EncodingKind::M || chain ||
                            (enc == EncodingKind::DC && cls == GraphClass::DAG) ||
                            (enc == EncodingKind::MC && cls == GraphClass::ADMG);
  const bool has_dnc = (enc == EncodingKind::D && !opt.reduced) || enc == EncodingKind::M || chain;
  const bool has_ac = cls == GraphClass::DAG || cls == GraphClass::ADMG;
  const bool has_bid = enc == EncodingKind::M || enc == EncodingKind::MC;
  const bool has_zbid = enc == EncodingKind::MC;
  const bool has_sb = enc == EncodingKind::M;
  const int a = distance_cap(enc, d);

  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j) p.add_var(vn::xd(i, j), VarType::BINARY, 0, 1);
  if (has_xb)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) p.add_var(vn::xb(i, j), VarType::BINARY, 0, 1);
  if (has_xs)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j) p.add_var(vn::xs(i, j), VarType::BINARY, 0, 1);
  if (has_anterior)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j) {
          p.add_var(vn::lant(i, j), VarType::INTEGER, 1, d);
          p.add_var(vn::dn(i, j), VarType::BINARY, 0, 1);
        }
  if (chain)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        p.add_var(vn::lu(i, j), VarType::INTEGER, 1, d);
        p.add_var(vn::zu(i, j), VarType::BINARY, 0, 1);
      }
  if (has_bid)
    for (NodeSet c : fam.sets)
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
          p.add_var(vn::lbid(i, j, c), VarType::INTEGER, 1, d);
          if (has_zbid) p.add_var(vn::zbid(i, j, c), VarType::BINARY, 0, 1);
        }
  if (has_sb)
    for (NodeSet c : fam.sets)
      for (int i = 0; i < d; ++i) {
        if (contains(c, i)) continue;
        for_each_node(c, [&](int j) { p.add_var(vn::lsb(i, j, c), VarType::INTEGER, 1, d); });
      }
  for (NodeSet c : fam.sets)
    for (int i = 0; i < d; ++i) {
      if (contains(c, i)) continue;
      for (int j = i + 1; j < d; ++j) {
        if (contains(c, j)) continue;
        p.add_var(vn::lm(i, j, c), VarType::INTEGER, 1, a + 1);
        p.add_var(vn::z(i, j, c), VarType::BINARY, 0, 1);
      }
    }

  detail::Encoder e{p, d, cls, enc, fam, opt.reduced, a};
  if (has_xs && !chain) e.emit_consistency();
  if (has_anterior) e.emit_anterior();
  if (has_dnc)
    for (NodeSet c : fam.sets) e.emit_dnc_for_mask(c);
  if (chain) e.emit_chain_structure();
  if (has_ac) e.emit_acyclicity();
  if (has_bid) e.emit_bidirected(has_zbid);
  if (has_sb) e.emit_semi_bidirected();
  e.emit_main();
  return p;
}

// Objective sum of w * |1{separated} - 1{p > alpha}| over family triples,
// written on the z variables with the constant part retained.
inline void build_objective(MilpProgram& p, int d, const ConditioningFamily& fam,
                            const PValueTable& table, double alpha) {
  if (fam.d != d) throw std::invalid_argument("family node count mismatch");
  p.obj.assign(p.vars.size(), 0.0);
  p.obj_constant = 0.0;
  for (NodeSet c : fam.sets)
    for (int i = 0; i < d; ++i) {
      if (contains(c, i)) continue;
      for (int j = i + 1; j < d; ++j) {
        if (contains(c, j)) continue;
        const PValueEntry* e = table.find(i, j, c);
        if (!e)
          throw std::invalid_argument("no p-value for triple (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + "|c" + mask_hex(c) + ")");
        int t = e->p > alpha ? 1 : 0;
        p.obj[p.lookup(vn::z(i, j, c))] = e->w * (2 * t - 1);
        p.obj_constant += e->w * (1 - t);
      }
    }
}

inline void fix_edges(MilpProgram& p, const MixedGraph& g, GraphClass cls) {
  const int d = g.d();
  const bool chain = cls == GraphClass::CHAIN;
  if (g.hybrid() != chain)
    throw std::invalid_argument(chain ? "chain class needs a hybrid graph"
                                      : "directed classes need a dmg mode graph");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      p.pin(p.lookup(vn::xd(i, j)), g.dir(i, j) ? 1 : 0);
    }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      int xb = p.find_var(vn::xb(i, j));
      if (xb >= 0) p.pin(xb, g.bid(i, j) ? 1 : 0);
      else if (g.bid(i, j))
        throw std::invalid_argument("bidirected edge not representable in class");
    }
}

inline MixedGraph decode_graph(const MilpProgram& p, const std::vector<int>& assign, int d,
                               GraphClass cls) {
  if (assign.size() != p.vars.size()) throw std::invalid_argument("assignment size mismatch");
  MixedGraph g(d, cls == GraphClass::CHAIN);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      if (assign[p.lookup(vn::xd(i, j))]) g.set_dir(i, j, true);
    }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      int xb = p.find_var(vn::xb(i, j));
      if (xb >= 0 && assign[xb]) g.set_bid(i, j, true);
    }
  return g;
}

}  // namespace glip
