#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace glip {

enum class VarType { BINARY, INTEGER };

struct VarDef {
  std::string name;
  VarType type;
  int lb;
  int ub;
};

struct Term {
  int var;
  int coef;
};

// Integer affine expression sum(coef * var) + constant.
struct Affine {
  std::vector<Term> terms;
  int constant = 0;

  Affine& add(int var, int coef) {
    terms.push_back({var, coef});
    return *this;
  }
};

inline Affine affine_const(int c) {
  Affine a;
  a.constant = c;
  return a;
}

inline Affine affine_var(int var, int coef = 1, int constant = 0) {
  Affine a;
  a.constant = constant;
  a.add(var, coef);
  return a;
}

enum class Sense { LE, GE, EQ };

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense;
  int rhs;
};

// One equality system produced by emit_min_equality / emit_max_equality, or a
// binary link target = link_eq iff source = sentinel. Systems are solved layer
// by layer for a fixed graph; candidate expressions may reference targets of
// the same layer (monotone recursion) or of earlier layers. Systems without
// selectors rely on caller-emitted rows that are already exact.
struct EqSystem {
  enum class Kind { MIN, MAX, LINK };
  Kind kind;
  int target = -1;
  std::vector<Affine> candidates;
  std::optional<int> constant;
  std::vector<int> selectors;
  int source = -1;
  int sentinel = 0;
  int link_eq = 0;
  int layer = 0;
};

struct MilpProgram {
  std::vector<VarDef> vars;
  std::vector<Row> rows;
  std::vector<double> obj;
  double obj_constant = 0.0;
  std::vector<EqSystem> systems;
  std::map<std::string, int> index;

  int add_var(const std::string& name, VarType type, int lb, int ub) {
    if (lb > ub) throw std::invalid_argument("variable with empty range: " + name);
    auto [it, fresh] = index.emplace(name, static_cast<int>(vars.size()));
    if (!fresh) throw std::invalid_argument("duplicate variable: " + name);
    vars.push_back({name, type, lb, ub});
    obj.push_back(0.0);
    return it->second;
  }

  int lookup(const std::string& name) const {
    auto it = index.find(name);
    if (it == index.end()) throw std::invalid_argument("unknown variable: " + name);
    return it->second;
  }

  int find_var(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }

  void add_row(const std::string& name, std::vector<Term> terms, Sense sense, int rhs) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    for (const Term& t : terms) {
      if (!merged.empty() && merged.back().var == t.var) merged.back().coef += t.coef;
      else merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
    rows.push_back({name, std::move(merged), sense, rhs});
  }

  void pin(int var, int value) {
    if (value < vars[var].lb || value > vars[var].ub)
      throw std::invalid_argument("pin outside range: " + vars[var].name);
    vars[var].lb = vars[var].ub = value;
  }

  int lb(const Affine& a) const {
    int v = a.constant;
    for (const Term& t : a.terms) v += t.coef * (t.coef >= 0 ? vars[t.var].lb : vars[t.var].ub);
    return v;
  }

  int ub(const Affine& a) const {
    int v = a.constant;
    for (const Term& t : a.terms) v += t.coef * (t.coef >= 0 ? vars[t.var].ub : vars[t.var].lb);
    return v;
  }
};

inline int eval_affine(const Affine& a, const std::vector<int>& assign) {
  int v = a.constant;
  for (const Term& t : a.terms) v += t.coef * assign[t.var];
  return v;
}

namespace detail {

// Row target - expr <sense> 0, written with expr moved to the right-hand side.
inline void add_expr_row(MilpProgram& p, const std::string& name, int target, const Affine& expr,
                         Sense sense) {
  std::vector<Term> terms;
  terms.push_back({target, 1});
  for (const Term& t : expr.terms) terms.push_back({t.var, -t.coef});
  p.add_row(name, std::move(terms), sense, expr.constant);
}

}  // namespace detail

// target = min(candidates..., constant). Emits one upper row per candidate
// (named by the caller), selector binaries with big-M lower rows, and a
// cover row forcing at least one selector. M is ub(candidate) - lb(target).
inline void emit_min_equality(MilpProgram& p, const std::string& sys_id, int target,
                              const std::vector<std::pair<std::string, Affine>>& candidates,
                              std::optional<int> constant, int layer) {
  EqSystem sys;
  sys.kind = EqSystem::Kind::MIN;
  sys.target = target;
  sys.constant = constant;
  sys.layer = layer;
  std::vector<Term> cover;
  int idx = 0;
  for (const auto& [row_name, expr] : candidates) {
    detail::add_expr_row(p, row_name, target, expr, Sense::LE);
    int s = p.add_var("sel_" + sys_id + "_" + std::to_string(idx), VarType::BINARY, 0, 1);
    int big_m = p.ub(expr) - p.vars[target].lb;
    std::vector<Term> terms;
    terms.push_back({target, 1});
    for (const Term& t : expr.terms) terms.push_back({t.var, -t.coef});
    terms.push_back({s, -big_m});
    p.add_row(sys_id + "_ge_" + std::to_string(idx), std::move(terms), Sense::GE,
              expr.constant - big_m);
    cover.push_back({s, 1});
    sys.candidates.push_back(expr);
    sys.selectors.push_back(s);
    ++idx;
  }
  if (constant) {
    if (*constant < p.vars[target].ub)
      p.add_row(sys_id + "_cap", {{target, 1}}, Sense::LE, *constant);
    int s = p.add_var("sel_" + sys_id + "_" + std::to_string(idx), VarType::BINARY, 0, 1);
    int big_m = *constant - p.vars[target].lb;
    p.add_row(sys_id + "_ge_" + std::to_string(idx), {{target, 1}, {s, -big_m}}, Sense::GE,
              *constant - big_m);
    cover.push_back({s, 1});
    sys.selectors.push_back(s);
  }
  if (cover.empty()) throw std::logic_error("min system without candidates: " + sys_id);
  p.add_row(sys_id + "_pick", std::move(cover), Sense::GE, 1);
  p.systems.push_back(std::move(sys));
}

// target = max(candidates..., constant), mirrored from emit_min_equality
// with M = ub(target) - lb(candidate).
inline void emit_max_equality(MilpProgram& p, const std::string& sys_id, int target,
                              const std::vector<std::pair<std::string, Affine>>& candidates,
                              std::optional<int> constant, int layer) {
  EqSystem sys;
  sys.kind = EqSystem::Kind::MAX;
  sys.target = target;
  sys.constant = constant;
  sys.layer = layer;
  std::vector<Term> cover;
  int idx = 0;
  for (const auto& [row_name, expr] : candidates) {
    detail::add_expr_row(p, row_name, target, expr, Sense::GE);
    int s = p.add_var("sel_" + sys_id + "_" + std::to_string(idx), VarType::BINARY, 0, 1);
    int big_m = p.vars[target].ub - p.lb(expr);
    std::vector<Term> terms;
    terms.push_back({target, 1});
    for (const Term& t : expr.terms) terms.push_back({t.var, -t.coef});
    terms.push_back({s, big_m});
    p.add_row(sys_id + "_le_" + std::to_string(idx), std::move(terms), Sense::LE,
              expr.constant + big_m);
    cover.push_back({s, 1});
    sys.candidates.push_back(expr);
    sys.selectors.push_back(s);
    ++idx;
  }
  if (constant) {
    if (*constant > p.vars[target].lb)
      p.add_row(sys_id + "_cap", {{target, 1}}, Sense::GE, *constant);
    int s = p.add_var("sel_" + sys_id + "_" + std::to_string(idx), VarType::BINARY, 0, 1);
    int big_m = p.vars[target].ub - *constant;
    p.add_row(sys_id + "_le_" + std::to_string(idx), {{target, 1}, {s, big_m}}, Sense::LE,
              *constant + big_m);
    cover.push_back({s, 1});
    sys.selectors.push_back(s);
  }
  if (cover.empty()) throw std::logic_error("max system without candidates: " + sys_id);
  p.add_row(sys_id + "_pick", std::move(cover), Sense::GE, 1);
  p.systems.push_back(std::move(sys));
}

// Registers target = link_eq iff source = sentinel (the paired threshold rows
// are added by the encoder; this only drives the fixpoint solver).
inline void register_link(MilpProgram& p, int target, int source, int sentinel, int layer,
                          int link_eq = 0) {
  EqSystem sys;
  sys.kind = EqSystem::Kind::LINK;
  sys.target = target;
  sys.source = source;
  sys.sentinel = sentinel;
  sys.link_eq = link_eq;
  sys.layer = layer;
  p.systems.push_back(std::move(sys));
}

// Registers a min/max system whose rows the caller emitted exactly, with no
// selector variables.
inline void register_system(MilpProgram& p, EqSystem::Kind kind, int target,
                            std::vector<Affine> candidates, std::optional<int> constant,
                            int layer) {
  EqSystem sys;
  sys.kind = kind;
  sys.target = target;
  sys.candidates = std::move(candidates);
  sys.constant = constant;
  sys.layer = layer;
  if (sys.candidates.empty() && !sys.constant)
    throw std::logic_error("system without candidates");
  p.systems.push_back(std::move(sys));
}

enum class FixpointStart { ABOVE, BELOW };

// Solves the layered equality systems for a fully pinned edge assignment by
// Kleene iteration, monotone per layer. ABOVE starts min systems at their
// upper bounds (greatest fixpoint), BELOW at their lower bounds; a unique
// solution makes both agree. Selector variables are set to the first
// attaining candidate. Returns false when a target lands outside its bounds.
inline bool solve_systems(const MilpProgram& p, std::vector<int>& assign, FixpointStart start) {
  const int n = static_cast<int>(p.vars.size());
  assign.assign(n, 0);
  std::vector<bool> driven(n, false);
  for (const EqSystem& s : p.systems) {
    driven[s.target] = true;
    for (int sel : s.selectors) driven[sel] = true;
  }
  for (int v = 0; v < n; ++v) {
    if (p.vars[v].lb == p.vars[v].ub) assign[v] = p.vars[v].lb;
    else if (!driven[v])
      throw std::logic_error("free variable not driven by any system: " + p.vars[v].name);
  }
  std::vector<std::size_t> order(p.systems.size());
  for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p.systems[a].layer < p.systems[b].layer;
  });
  std::size_t lo = 0;
  bool in_bounds = true;
  while (lo < order.size()) {
    std::size_t hi = lo;
    while (hi < order.size() && p.systems[order[hi]].layer == p.systems[order[lo]].layer) ++hi;
    long sweep_budget = 2;
    for (std::size_t s = lo; s < hi; ++s) {
      const EqSystem& sys = p.systems[order[s]];
      if (sys.kind == EqSystem::Kind::LINK) continue;
      const VarDef& t = p.vars[sys.target];
      bool high = (sys.kind == EqSystem::Kind::MIN) == (start == FixpointStart::ABOVE);
      assign[sys.target] = high ? t.ub : t.lb;
      sweep_budget += t.ub - t.lb;
    }
    bool changed = true;
    while (changed) {
      if (--sweep_budget < 0) throw std::logic_error("fixpoint iteration failed to converge");
      changed = false;
      for (std::size_t s = lo; s < hi; ++s) {
        const EqSystem& sys = p.systems[order[s]];
        int value;
        if (sys.kind == EqSystem::Kind::LINK) {
          value = assign[sys.source] == sys.sentinel ? sys.link_eq : 1 - sys.link_eq;
        } else {
          bool minimize = sys.kind == EqSystem::Kind::MIN;
          std::optional<int> acc = sys.constant;
          for (const Affine& c : sys.candidates) {
            int v = eval_affine(c, assign);
            if (!acc || (minimize ? v < *acc : v > *acc)) acc = v;
          }
          value = *acc;
        }
        if (value != assign[sys.target]) {
          assign[sys.target] = value;
          changed = true;
        }
      }
    }
    for (std::size_t s = lo; s < hi; ++s) {
      const EqSystem& sys = p.systems[order[s]];
      const VarDef& t = p.vars[sys.target];
      if (assign[sys.target] < t.lb || assign[sys.target] > t.ub) in_bounds = false;
      if (sys.kind == EqSystem::Kind::LINK || sys.selectors.empty()) continue;
      bool taken = false;
      for (std::size_t c = 0; c < sys.candidates.size(); ++c) {
        bool hit = !taken && eval_affine(sys.candidates[c], assign) == assign[sys.target];
        assign[sys.selectors[c]] = hit ? 1 : 0;
        taken = taken || hit;
      }
      if (sys.constant) {
        bool hit = !taken && *sys.constant == assign[sys.target];
        assign[sys.selectors.back()] = hit ? 1 : 0;
        taken = taken || hit;
      }
      if (!taken) throw std::logic_error("no candidate attains the fixpoint value");
    }
    lo = hi;
  }
  return in_bounds;
}

// Names of violated rows plus "bounds:<var>" entries; empty means feasible.
inline std::vector<std::string> validate_assignment(const MilpProgram& p,
                                                    const std::vector<int>& assign) {
  if (assign.size() != p.vars.size()) throw std::invalid_argument("assignment size mismatch");
  std::vector<std::string> bad;
  for (std::size_t v = 0; v < p.vars.size(); ++v)
    if (assign[v] < p.vars[v].lb || assign[v] > p.vars[v].ub)
      bad.push_back("bounds:" + p.vars[v].name);
  for (const Row& r : p.rows) {
    long lhs = 0;
    for (const Term& t : r.terms) lhs += static_cast<long>(t.coef) * assign[t.var];
    bool ok = r.sense == Sense::LE ? lhs <= r.rhs : r.sense == Sense::GE ? lhs >= r.rhs : lhs == r.rhs;
    if (!ok) bad.push_back(r.name);
  }
  return bad;
}

inline double objective_value(const MilpProgram& p, const std::vector<int>& assign) {
  double v = p.obj_constant;
  for (std::size_t i = 0; i < p.vars.size(); ++i) v += p.obj[i] * assign[i];
  return v;
}

}  // namespace glip
