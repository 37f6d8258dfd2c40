#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "milp.hpp"

namespace glip {

namespace detail {

inline std::string real_str(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Fixed-field MPS with integer markers, explicit bounds, and the objective
// constant as a negated RHS entry on the objective row.
inline void write_mps(const MilpProgram& p, std::ostream& os, const std::string& name = "GLIP") {
  os << "NAME          " << name << "\n";
  os << "ROWS\n N  COST\n";
  for (const Row& r : p.rows) {
    char s = r.sense == Sense::LE ? 'L' : r.sense == Sense::GE ? 'G' : 'E';
    os << " " << s << "  " << r.name << "\n";
  }
  std::vector<std::vector<std::pair<int, int>>> cols(p.vars.size());
  for (std::size_t r = 0; r < p.rows.size(); ++r)
    for (const Term& t : p.rows[r].terms) cols[t.var].push_back({static_cast<int>(r), t.coef});
  os << "COLUMNS\n";
  os << "    MARKER                 'MARKER'                 'INTORG'\n";
  for (std::size_t v = 0; v < p.vars.size(); ++v) {
    const std::string& vn = p.vars[v].name;
    bool any = false;
    if (p.obj[v] != 0.0) {
      os << "    " << vn << "  COST  " << detail::real_str(p.obj[v]) << "\n";
      any = true;
    }
    for (const auto& [row, coef] : cols[v]) {
      os << "    " << vn << "  " << p.rows[row].name << "  " << coef << "\n";
      any = true;
    }
    if (!any) os << "    " << vn << "  COST  0\n";
  }
  os << "    MARKER                 'MARKER'                 'INTEND'\n";
  os << "RHS\n";
  if (p.obj_constant != 0.0)
    os << "    RHS  COST  " << detail::real_str(-p.obj_constant) << "\n";
  for (const Row& r : p.rows)
    if (r.rhs != 0) os << "    RHS  " << r.name << "  " << r.rhs << "\n";
  os << "BOUNDS\n";
  for (const VarDef& v : p.vars) {
    if (v.lb == v.ub) {
      os << " FX BND  " << v.name << "  " << v.lb << "\n";
      continue;
    }
    os << " LO BND  " << v.name << "  " << v.lb << "\n";
    os << " UP BND  " << v.name << "  " << v.ub << "\n";
  }
  os << "ENDATA\n";
}

// CPLEX-style LP format.
inline void write_lp(const MilpProgram& p, std::ostream& os) {
  os << "Minimize\n obj:";
  bool first = true;
  for (std::size_t v = 0; v < p.vars.size(); ++v) {
    if (p.obj[v] == 0.0) continue;
    double c = p.obj[v];
    os << (c < 0 ? " - " : first ? " " : " + ") << detail::real_str(std::fabs(c)) << " "
       << p.vars[v].name;
    first = false;
  }
  if (p.obj_constant != 0.0)
    os << (p.obj_constant < 0 ? " - " : first ? " " : " + ")
       << detail::real_str(std::fabs(p.obj_constant));
  else if (first)
    os << " 0";
  os << "\nSubject To\n";
  for (const Row& r : p.rows) {
    os << " " << r.name << ":";
    bool f = true;
    for (const Term& t : r.terms) {
      int c = t.coef;
      os << (c < 0 ? " - " : f ? " " : " + ") << std::abs(c) << " " << p.vars[t.var].name;
      f = false;
    }
    if (f) os << " 0 " << p.vars.front().name;
    os << (r.sense == Sense::LE ? " <= " : r.sense == Sense::GE ? " >= " : " = ") << r.rhs << "\n";
  }
  os << "Bounds\n";
  for (const VarDef& v : p.vars) {
    if (v.lb == v.ub) os << " " << v.name << " = " << v.lb << "\n";
    else os << " " << v.lb << " <= " << v.name << " <= " << v.ub << "\n";
  }
  os << "Generals\n";
  for (const VarDef& v : p.vars) os << " " << v.name << "\n";
  os << "End\n";
}

// Parses "<name> <value>" solution lines, rounds near-integers, validates
// every row, and rejects with the first violated tag. Unknown names are
// reported as warnings; absent variables default to their lower bound.
inline std::vector<int> import_solution(const MilpProgram& p, std::istream& is,
                                        std::vector<std::string>* warnings = nullptr) {
  std::vector<int> assign(p.vars.size());
  for (std::size_t v = 0; v < p.vars.size(); ++v) assign[v] = p.vars[v].lb;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name) || name[0] == '#') continue;
    double value;
    if (!(ls >> value))
      throw std::invalid_argument("solution line " + std::to_string(lineno) + ": missing value");
    int var = p.find_var(name);
    if (var < 0) {
      if (warnings) warnings->push_back("unknown variable ignored: " + name);
      continue;
    }
    double r = std::round(value);
    if (std::fabs(value - r) > 1e-6)
      throw std::invalid_argument("non-integral value for " + name + ": " + detail::real_str(value));
    assign[var] = static_cast<int>(r);
  }
  std::vector<std::string> bad = validate_assignment(p, assign);
  if (!bad.empty())
    throw std::invalid_argument("imported solution violates " + bad.front() + " (" +
                                std::to_string(bad.size()) + " violations)");
  return assign;
}

}  // namespace glip
