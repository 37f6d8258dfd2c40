#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "encode.hpp"
#include "family.hpp"
#include "graph.hpp"
#include "milp.hpp"
#include "mps.hpp"
#include "pvalues.hpp"
#include "separation.hpp"

namespace glip {

enum class SolveStatus { OPTIMAL, FEASIBLE_TIMEOUT, INFEASIBLE };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::OPTIMAL: return "optimal";
    case SolveStatus::FEASIBLE_TIMEOUT: return "feasible_timeout";
    case SolveStatus::INFEASIBLE: return "infeasible";
  }
  throw std::logic_error("bad status");
}

struct SolveStats {
  long nodes = 0;
  long leaves = 0;
  double wall_seconds = 0;
};

struct Solution {
  SolveStatus status = SolveStatus::INFEASIBLE;
  MixedGraph graph{1, false};
  double objective = 0;
  double lower_bound = 0;
  SolveStats stats;
};

// Score of a graph under the learning objective, evaluated with the
// separation oracles rather than the program.
inline double oracle_cost(const MixedGraph& g, Criterion crit, const ConditioningFamily& fam,
                          const PValueTable& table, double alpha) {
  const int d = g.d();
  if (fam.d != d) throw std::invalid_argument("family node count mismatch");
  double cost = 0;
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
        int sep = separated(g, i, j, c, crit) ? 1 : 0;
        cost += e->w * std::abs(sep - t);
      }
    }
  return cost;
}

// Canonical key: directed rows then bidirected rows, low node first.
inline std::vector<NodeSet> graph_key(const MixedGraph& g) {
  std::vector<NodeSet> key;
  for (int i = 0; i < g.d(); ++i) key.push_back(g.children(i));
  for (int i = 0; i < g.d(); ++i) key.push_back(g.spouses(i));
  return key;
}

inline int enumeration_cap(GraphClass cls) {
  return cls == GraphClass::DAG || cls == GraphClass::CHAIN ? 4 : 3;
}

// Every member of the class exactly once, in ascending edge-state order.
inline std::vector<MixedGraph> enumerate_class(GraphClass cls, int d) {
  if (d < 1 || d > enumeration_cap(cls))
    throw std::invalid_argument(std::string("enumeration cap exceeded for ") + to_string(cls));
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) pairs.push_back({i, j});
  const int np = static_cast<int>(pairs.size());
  std::vector<MixedGraph> out;
  if (cls == GraphClass::CHAIN) {
    long total = 1;
    for (int i = 0; i < np; ++i) total *= 4;
    for (long code = 0; code < total; ++code) {
      MixedGraph g(d, true);
      long c = code;
      for (int s = 0; s < np; ++s, c /= 4) {
        int state = c % 4;
        auto [i, j] = pairs[s];
        if (state == 1) g.set_dir(i, j, true);
        else if (state == 2) g.set_dir(j, i, true);
        else if (state == 3) g.set_und(i, j, true);
      }
      if (g.valid(cls)) out.push_back(g);
    }
    return out;
  }
  const bool with_bid = cls == GraphClass::ADMG || cls == GraphClass::DMG;
  long dir_total = 1;
  for (int i = 0; i < np; ++i) dir_total *= 4;
  long bid_total = with_bid ? (1L << np) : 1;
  for (long dc = 0; dc < dir_total; ++dc) {
    MixedGraph base(d, false);
    long c = dc;
    for (int s = 0; s < np; ++s, c /= 4) {
      int state = c % 4;
      auto [i, j] = pairs[s];
      if (state & 1) base.set_dir(i, j, true);
      if (state & 2) base.set_dir(j, i, true);
    }
    if (!base.valid(cls == GraphClass::ADMG ? GraphClass::DAG
                    : cls == GraphClass::DMG ? GraphClass::DG
                                             : cls))
      continue;
    for (long bc = 0; bc < bid_total; ++bc) {
      MixedGraph g = base;
      for (int s = 0; s < np; ++s)
        if (bc & (1L << s)) g.set_bid(pairs[s].first, pairs[s].second, true);
      out.push_back(g);
    }
  }
  return out;
}

inline Solution solve_bruteforce(GraphClass cls, Criterion crit, int d,
                                 const ConditioningFamily& fam, const PValueTable& table,
                                 double alpha) {
  auto start = std::chrono::steady_clock::now();
  Solution best;
  for (const MixedGraph& g : enumerate_class(cls, d)) {
    double cost = oracle_cost(g, crit, fam, table, alpha);
    ++best.stats.leaves;
    if (best.status == SolveStatus::INFEASIBLE || cost < best.objective) {
      best.status = SolveStatus::OPTIMAL;
      best.graph = g;
      best.objective = cost;
    }
  }
  best.lower_bound = best.objective;
  best.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

namespace detail {

// Edge states per unordered slot; directed bit 1 = i->j, bit 2 = j->i,
// bit 4 = i<->j; the chain state 3 is the undirected edge.
inline std::vector<int> slot_states(GraphClass cls) {
  switch (cls) {
    case GraphClass::DAG: return {0, 1, 2};
    case GraphClass::DG: return {0, 1, 2, 3};
    case GraphClass::ADMG: return {0, 1, 2, 4, 5, 6};
    case GraphClass::DMG: return {0, 1, 2, 3, 4, 5, 6, 7};
    case GraphClass::CHAIN: return {0, 1, 2, 3};
  }
  throw std::logic_error("bad class");
}

inline void apply_slot(MixedGraph& g, int i, int j, int state, bool chain) {
  if (chain) {
    g.set_dir(i, j, state == 1 || state == 3);
    g.set_dir(j, i, state == 2 || state == 3);
    return;
  }
  g.set_dir(i, j, state & 1);
  g.set_dir(j, i, state & 2);
  g.set_bid(i, j, state & 4);
}

struct BnbState {
  GraphClass cls;
  Criterion crit;
  const ConditioningFamily* fam;
  const PValueTable* table;
  double alpha;
  std::vector<std::pair<int, int>> slots;
  std::vector<double> adj_penalty;
  std::vector<int> states;
  std::chrono::steady_clock::time_point deadline;
  bool use_deadline = false;
  bool timed_out = false;
  MixedGraph work{1, false};
  Solution best;
  bool have_incumbent = false;

  void leaf() {
    ++best.stats.leaves;
    if (!work.valid(cls)) return;
    double cost = oracle_cost(work, crit, *fam, *table, alpha);
    if (!have_incumbent || cost < best.objective) {
      best.graph = work;
      best.objective = cost;
      have_incumbent = true;
    }
  }

  void search(std::size_t s, double bound) {
    ++best.stats.nodes;
    if (use_deadline && std::chrono::steady_clock::now() >= deadline) {
      timed_out = true;
      return;
    }
    if (have_incumbent && bound > best.objective) return;
    if (s == slots.size()) {
      leaf();
      return;
    }
    auto [i, j] = slots[s];
    for (int state : states) {
      apply_slot(work, i, j, state, cls == GraphClass::CHAIN);
      if (state != 0) {
        if (cls == GraphClass::DAG && work.has_directed_cycle()) continue;
        if (cls == GraphClass::CHAIN && work.has_partially_directed_cycle()) continue;
      }
      double b = bound + (state != 0 ? adj_penalty[s] : 0.0);
      search(s + 1, b);
      if (timed_out) break;
    }
    apply_slot(work, i, j, 0, cls == GraphClass::CHAIN);
  }
};

}  // namespace detail

// Exact branch and bound over edge slots. The bound charges, for every slot
// already decided adjacent, the weight of its independence triples: adjacency
// connects the endpoints under every criterion in scope.
inline Solution solve_bnb(GraphClass cls, Criterion crit, int d, const ConditioningFamily& fam,
                          const PValueTable& table, double alpha,
                          const std::optional<MixedGraph>& warmstart = std::nullopt,
                          double walltime = 0) {
  auto start = std::chrono::steady_clock::now();
  if (warmstart) {
    if (warmstart->d() != d || !warmstart->valid(cls))
      throw std::invalid_argument("warmstart graph not in the requested class");
  }
  detail::BnbState st;
  st.cls = cls;
  st.crit = crit;
  st.fam = &fam;
  st.table = &table;
  st.alpha = alpha;
  st.states = detail::slot_states(cls);
  st.work = MixedGraph(d, cls == GraphClass::CHAIN);
  struct Slot {
    std::pair<int, int> pair;
    double stake;
    double sep_weight;
  };
  std::vector<Slot> slots;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      Slot s{{i, j}, 0.0, 0.0};
      for (NodeSet c : fam.sets) {
        if (contains(c, i) || contains(c, j)) continue;
        const PValueEntry* e = table.find(i, j, c);
        if (!e)
          throw std::invalid_argument("no p-value for triple (" + std::to_string(i + 1) + "," +
                                      std::to_string(j + 1) + "|c" + mask_hex(c) + ")");
        s.stake += e->w * std::abs(0.5 - (e->p > alpha ? 1 : 0));
        if (e->p > alpha) s.sep_weight += e->w;
      }
      slots.push_back(s);
    }
  std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    if (a.stake != b.stake) return a.stake > b.stake;
    return a.pair < b.pair;
  });
  for (const Slot& s : slots) {
    st.slots.push_back(s.pair);
    st.adj_penalty.push_back(s.sep_weight);
  }
  if (warmstart) {
    st.best.graph = *warmstart;
    st.best.objective = oracle_cost(*warmstart, crit, fam, table, alpha);
    st.have_incumbent = true;
  }
  if (walltime > 0) {
    st.use_deadline = true;
    st.deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(walltime));
    st.search(0, 0.0);
  } else if (walltime == 0 && warmstart) {
    st.timed_out = true;
  } else {
    st.search(0, 0.0);
  }
  Solution out = st.best;
  if (!st.have_incumbent) {
    out.graph = MixedGraph(d, cls == GraphClass::CHAIN);
    out.objective = oracle_cost(out.graph, crit, fam, table, alpha);
  }
  out.status = st.timed_out ? SolveStatus::FEASIBLE_TIMEOUT : SolveStatus::OPTIMAL;
  out.lower_bound = st.timed_out ? 0.0 : out.objective;
  out.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

struct TripleReport {
  int i;
  int j;
  NodeSet cond;
  bool separated;
  int t;
  double w;
  double contribution;
};

struct VerificationReport {
  bool class_ok = false;
  double objective = 0;
  bool objective_match = false;
  std::vector<TripleReport> triples;
};

inline VerificationReport verify_solution(const Solution& sol, GraphClass cls, Criterion crit,
                                          const ConditioningFamily& fam, const PValueTable& table,
                                          double alpha) {
  VerificationReport rep;
  rep.class_ok = sol.graph.valid(cls);
  const int d = sol.graph.d();
  for (NodeSet c : fam.sets)
    for (int i = 0; i < d; ++i) {
      if (contains(c, i)) continue;
      for (int j = i + 1; j < d; ++j) {
        if (contains(c, j)) continue;
        const PValueEntry* e = table.find(i, j, c);
        if (!e) throw std::invalid_argument("table does not cover the family");
        bool sep = separated(sol.graph, i, j, c, crit);
        int t = e->p > alpha ? 1 : 0;
        double contrib = e->w * std::abs((sep ? 1 : 0) - t);
        rep.triples.push_back({i, j, c, sep, t, e->w, contrib});
        rep.objective += contrib;
      }
    }
  rep.objective_match = std::abs(rep.objective - sol.objective) <= 1e-6;
  return rep;
}

// Runs the command template ({mps}, {out}, {wall} placeholders), imports and
// validates the solution, decodes the graph, and recomputes the objective with
// the oracles; a mismatch beyond 1e-6 is a hard error.
inline Solution solve_external(const MilpProgram& p, int d, GraphClass cls, Criterion crit,
                               const ConditioningFamily& fam, const PValueTable& table,
                               double alpha, const std::string& cmd_template, double walltime,
                               const std::string& workdir = "") {
  auto start = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  fs::path dir = workdir.empty() ? fs::temp_directory_path() : fs::path(workdir);
  fs::create_directories(dir);
  static int counter = 0;
  std::string stem = "glip_" + std::to_string(static_cast<long>(::getpid())) + "_" +
                     std::to_string(++counter);
  fs::path mps_path = dir / (stem + ".mps");
  fs::path sol_path = dir / (stem + ".sol");
  {
    std::ofstream os(mps_path);
    if (!os) throw std::runtime_error("cannot write " + mps_path.string());
    write_mps(p, os);
  }
  std::string cmd = cmd_template;
  auto subst = [&cmd](const std::string& key, const std::string& value) {
    for (std::size_t pos; (pos = cmd.find(key)) != std::string::npos;)
      cmd.replace(pos, key.size(), value);
  };
  subst("{mps}", mps_path.string());
  subst("{out}", sol_path.string());
  char wall[32];
  std::snprintf(wall, sizeof wall, "%g", walltime);
  subst("{wall}", wall);
  int rc = std::system(cmd.c_str());
  int code = rc < 0 ? rc : (rc & 0x7f) ? 128 : (rc >> 8) & 0xff;
  if (code != 0 && code != 2) {
    if (code == 3) throw std::runtime_error("external solver reported infeasible");
    throw std::runtime_error("external solver failed with code " + std::to_string(code) + ": " + cmd);
  }
  std::ifstream is(sol_path);
  if (!is) throw std::runtime_error("external solver produced no solution file");
  std::vector<std::string> warnings;
  std::vector<int> assign = import_solution(p, is, &warnings);
  Solution out;
  out.graph = decode_graph(p, assign, d, cls);
  if (!out.graph.valid(cls)) throw std::runtime_error("decoded graph violates the class");
  double milp_obj = objective_value(p, assign);
  double oracle_obj = oracle_cost(out.graph, crit, fam, table, alpha);
  if (std::abs(milp_obj - oracle_obj) > 1e-6)
    throw std::runtime_error("objective mismatch: program " + detail::real_str(milp_obj) +
                             " vs oracles " + detail::real_str(oracle_obj));
  out.objective = oracle_obj;
  out.status = code == 0 ? SolveStatus::OPTIMAL : SolveStatus::FEASIBLE_TIMEOUT;
  out.lower_bound = code == 0 ? oracle_obj : 0.0;
  out.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace glip
