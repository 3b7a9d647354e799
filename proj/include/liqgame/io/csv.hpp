#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "liqgame/constrained_nash.hpp"
#include "liqgame/error.hpp"
#include "liqgame/stackelberg.hpp"
#include "liqgame/unconstrained_nash.hpp"

namespace liqgame::io {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Rows of numbers under a header, plus trailing "# key=value" comments.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCategory::kValidation, "CSV has no column " + name);
  }

  std::vector<double> values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> v(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) v[k] = rows[k][c];
    return v;
  }
};

inline std::string to_csv(const CsvTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i > 0) out += ',';
    out += t.header[i];
  }
  out += '\n';
  for (const std::vector<double>& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  for (const std::string& c : t.comments) out += "# " + c + '\n';
  return out;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      t.comments.push_back(line.substr(2));
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw Error(ErrorCategory::kValidation, "CSV row has " + std::to_string(cells.size()) +
                                                  " cells, header has " +
                                                  std::to_string(t.header.size()));
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || *end != '\0') {
        throw Error(ErrorCategory::kValidation, "CSV cell is not a number: " + c);
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCategory::kValidation, "CSV is empty");
  return t;
}

/// Columns t, q_1..q_N, nu_1..nu_N, avg_q, avg_nu.
inline CsvTable trajectory_table(const EquilibriumTrajectory& tr) {
  CsvTable t;
  const std::size_t n = tr.players();
  t.header.push_back("t");
  for (std::size_t i = 1; i <= n; ++i) t.header.push_back("q_" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) t.header.push_back("nu_" + std::to_string(i));
  t.header.push_back("avg_q");
  t.header.push_back("avg_nu");
  for (std::size_t k = 0; k < tr.q.size(); ++k) {
    std::vector<double> row{tr.grid.t(k)};
    row.insert(row.end(), tr.q[k].begin(), tr.q[k].end());
    row.insert(row.end(), tr.nu[k].begin(), tr.nu[k].end());
    row.push_back(tr.avg_q[k]);
    row.push_back(tr.avg_nu[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Columns param, distance; the fitted slope goes in a trailing comment.
inline CsvTable sweep_table(const SweepResult& r) {
  CsvTable t;
  t.header = {"param", "distance"};
  for (std::size_t i = 0; i < r.values.size(); ++i) t.rows.push_back({r.values[i], r.distances[i]});
  t.comments.push_back("slope=" + (r.slope ? format_double(*r.slope) : std::string("none")));
  return t;
}

/// Columns iter, sup_distance.
inline CsvTable iteration_table(const std::vector<double>& distances) {
  CsvTable t;
  t.header = {"iter", "sup_distance"};
  for (std::size_t i = 0; i < distances.size(); ++i) {
    t.rows.push_back({static_cast<double>(i + 1), distances[i]});
  }
  return t;
}

/// Columns t, E1, E2, E3, F1, F2, F3, leader_rate, follower_avg_rate.
inline CsvTable hierarchy_table(const HierarchySolution& s) {
  CsvTable t;
  t.header = {"t", "E1", "E2", "E3", "F1", "F2", "F3", "leader_rate", "follower_avg_rate"};
  for (std::size_t k = 0; k < s.E.size(); ++k) {
    t.rows.push_back({s.grid.t(k), s.E[k][0], s.E[k][1], s.E[k][2], s.F[k][0], s.F[k][1],
                      s.F[k][2], s.leader_rate[k], s.follower_avg_rate[k]});
  }
  return t;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace liqgame::io
