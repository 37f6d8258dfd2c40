#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <compare>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "glip/bits.hpp"
#include "glip/family.hpp"

namespace glip {

struct TripleKey {
  int i;
  int j;
  NodeSet cond;
  auto operator<=>(const TripleKey&) const = default;
};

struct PValueEntry {
  double p = 1.0;
  double w = 1.0;
};

// Scored triples keyed by (i < j, C) with both endpoints outside C.
struct PValueTable {
  int d = 0;
  std::map<TripleKey, PValueEntry> entries;

  void set(int i, int j, NodeSet C, double p, double w = 1.0) {
    if (i == j) throw std::invalid_argument("p-value triple with i = j");
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= kMaxNodes) throw std::invalid_argument("p-value triple out of range");
    if (contains(C, i) || contains(C, j))
      throw std::invalid_argument("p-value triple with an endpoint in C");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-value outside [0, 1]");
    if (!(w >= 0.0)) throw std::invalid_argument("negative weight");
    if (j >= d) d = j + 1;
    entries[TripleKey{i, j, C}] = PValueEntry{p, w};
  }

  const PValueEntry* find(int i, int j, NodeSet C) const {
    if (i > j) std::swap(i, j);
    auto it = entries.find(TripleKey{i, j, C});
    return it == entries.end() ? nullptr : &it->second;
  }
};

// Numeric data matrix with one named column per variable.
struct DataTable {
  std::vector<std::string> names;
  Eigen::MatrixXd x;
};

namespace detail {

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Splits one CSV line; quoted fields may contain commas, "" escapes a quote.
inline std::vector<std::string> split_csv(const std::string& line, int lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t p = 0; p < line.size(); ++p) {
    char c = line[p];
    if (quoted) {
      if (c == '"') {
        if (p + 1 < line.size() && line[p + 1] == '"') {
          cur += '"';
          ++p;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quote on line " + std::to_string(lineno));
  out.push_back(cur);
  return out;
}

inline double parse_real(const std::string& s, int lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + s + "' on line " + std::to_string(lineno));
  }
}

inline int parse_node(const std::string& s, int lineno) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size() || v < 1 || v > kMaxNodes) throw std::invalid_argument("range");
    return v - 1;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad node id '" + s + "' on line " + std::to_string(lineno));
  }
}

inline NodeSet parse_cond(const std::string& field, int lineno) {
  NodeSet C = 0;
  std::string cur;
  std::istringstream is(field);
  while (std::getline(is, cur, ';')) {
    if (cur.empty()) continue;
    C |= bit(parse_node(cur, lineno));
  }
  return C;
}

inline std::string cond_to_field(NodeSet C) {
  std::string s;
  for_each_node(C, [&](int v) {
    if (!s.empty()) s += ';';
    s += std::to_string(v + 1);
  });
  return s;
}

}  // namespace detail

// CSV schema: header i,j,C,p,w with C a ';'-joined list of 1-based ids.
inline void write_table(const PValueTable& table, std::ostream& os) {
  os << "i,j,C,p,w\n";
  for (const auto& [key, entry] : table.entries)
    os << (key.i + 1) << ',' << (key.j + 1) << ",\"" << detail::cond_to_field(key.cond) << "\","
       << detail::format_real(entry.p) << ',' << detail::format_real(entry.w) << "\n";
}

inline void write_table(const PValueTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_table(table, os);
}

// d defaults to the largest node id in the file; pass d to widen or check it.
inline PValueTable read_table(std::istream& is, int d = -1) {
  PValueTable table;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv(line, lineno);
    if (!have_header) {
      if (fields.size() != 5 || fields[0] != "i" || fields[1] != "j" || fields[2] != "C" ||
          fields[3] != "p" || fields[4] != "w")
        throw std::invalid_argument("expected header i,j,C,p,w on line " + std::to_string(lineno));
      have_header = true;
      continue;
    }
    if (fields.size() != 5)
      throw std::invalid_argument("expected 5 fields on line " + std::to_string(lineno));
    int i = detail::parse_node(fields[0], lineno);
    int j = detail::parse_node(fields[1], lineno);
    NodeSet C = detail::parse_cond(fields[2], lineno);
    double p = detail::parse_real(fields[3], lineno);
    double w = detail::parse_real(fields[4], lineno);
    if (i == j) throw std::invalid_argument("i = j on line " + std::to_string(lineno));
    TripleKey key{std::min(i, j), std::max(i, j), C};
    if (table.entries.count(key))
      throw std::invalid_argument("duplicate triple on line " + std::to_string(lineno));
    try {
      table.set(i, j, C, p, w);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " on line " + std::to_string(lineno));
    }
  }
  if (!have_header) throw std::invalid_argument("missing p-value header");
  if (d >= 0) {
    if (table.d > d) throw std::invalid_argument("node id exceeds declared d");
    table.d = d;
  }
  return table;
}

inline PValueTable read_table(const std::string& path, int d = -1) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_table(is, d);
}

inline void write_data(const DataTable& data, std::ostream& os) {
  for (std::size_t c = 0; c < data.names.size(); ++c)
    os << (c ? "," : "") << data.names[c];
  os << "\n";
  for (Eigen::Index r = 0; r < data.x.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c)
      os << (c ? "," : "") << detail::format_real(data.x(r, c));
    os << "\n";
  }
}

inline void write_data(const DataTable& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_data(data, os);
}

inline DataTable read_data(std::istream& is) {
  DataTable data;
  std::string line;
  int lineno = 0;
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = detail::split_csv(line, lineno);
    if (data.names.empty()) {
      data.names.assign(fields.begin(), fields.end());
      if (data.names.empty()) throw std::invalid_argument("empty data header");
      continue;
    }
    if (fields.size() != data.names.size())
      throw std::invalid_argument("column count mismatch on line " + std::to_string(lineno));
    for (const auto& f : fields) values.push_back(detail::parse_real(f, lineno));
    ++rows;
  }
  if (data.names.empty()) throw std::invalid_argument("missing data header");
  const Eigen::Index cols = static_cast<Eigen::Index>(data.names.size());
  data.x.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) data.x(r, c) = values[r * cols + c];
  return data;
}

inline DataTable read_data(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_data(is);
}

// Fisher z partial-correlation test: residualize both columns on C and an
// intercept, then p = 2 (1 - Phi(sqrt(n - |C| - 3) |atanh r|)). Returns
// nothing when the conditioning design is singular or a residual collapses.
inline std::optional<double> fisher_z_test(const Eigen::MatrixXd& x, int i, int j, NodeSet C) {
  const Eigen::Index n = x.rows();
  const int d = static_cast<int>(x.cols());
  if (i < 0 || j < 0 || i >= d || j >= d || i == j)
    throw std::invalid_argument("invalid column pair");
  if (contains(C, i) || contains(C, j))
    throw std::invalid_argument("conditioning set contains an endpoint");
  const int m = popcount(C);
  if (n <= m + 3) throw std::invalid_argument("too few observations for the test");
  Eigen::MatrixXd design(n, m + 1);
  design.col(0).setOnes();
  int col = 1;
  for_each_node(C, [&](int v) { design.col(col++) = x.col(v); });
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) return std::nullopt;
  Eigen::VectorXd ri = x.col(i) - design * qr.solve(x.col(i));
  Eigen::VectorXd rj = x.col(j) - design * qr.solve(x.col(j));
  const double di = ri.squaredNorm();
  const double dj = rj.squaredNorm();
  if (!(di > 0.0) || !(dj > 0.0)) return std::nullopt;
  double r = ri.dot(rj) / std::sqrt(di * dj);
  const double cap = 1.0 - 1e-12;
  if (r > cap) r = cap;
  if (r < -cap) r = -cap;
  const double stat = std::sqrt(static_cast<double>(n - m - 3)) * std::abs(std::atanh(r));
  return std::erfc(stat / std::sqrt(2.0));
}

struct TestRunResult {
  PValueTable table;
  int warnings = 0;
};

// One test per (i < j, C in the family); singular triples record p = 1 and
// bump the warning count instead of forcing an edge decision.
inline TestRunResult run_all_tests(const Eigen::MatrixXd& x, const ConditioningFamily& fam) {
  if (static_cast<int>(x.cols()) != fam.d)
    throw std::invalid_argument("data column count differs from the family's d");
  TestRunResult out;
  out.table.d = fam.d;
  for (NodeSet C : fam.sets)
    for (int i = 0; i < fam.d; ++i)
      for (int j = i + 1; j < fam.d; ++j) {
        if (contains(C, i) || contains(C, j)) continue;
        auto p = fisher_z_test(x, i, j, C);
        if (!p) ++out.warnings;
        out.table.set(i, j, C, p.value_or(1.0));
      }
  return out;
}

}  // namespace glip
