#pragma once

// Plain-text instance format.
//
//   qubo <pm1|01> <n> <nnz>
//   # key = value                (metadata; "name" is the instance label)
//   i j value                    (nnz lines, 0-based, i <= j, sets Q_ij = Q_ji)
//   linear i value               (0/1 convention only)
//
// Values are written with 17 significant digits so read(write(inst)) is
// bit-exact.  Reading distinguishes four failure classes:
//   io_error         file cannot be opened / stream failure
//   parse_error      malformed header or line
//   index_error      variable index out of range
//   asymmetry_error  conflicting values for the same (i, j) pair

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "demqubo/qubo.hpp"

namespace demqubo {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct parse_error : io_error {
  using io_error::io_error;
};
struct index_error : io_error {
  using io_error::io_error;
};
struct asymmetry_error : io_error {
  using io_error::io_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& tok, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(tok, &pos);
    return pos == tok.size();
  } catch (...) {
    return false;
  }
}

inline bool parse_index(const std::string& tok, long long& out) {
  try {
    std::size_t pos = 0;
    out = std::stoll(tok, &pos);
    return pos == tok.size();
  } catch (...) {
    return false;
  }
}

}  // namespace detail

inline void write_instance(std::ostream& os, const QuboInstance& inst) {
  validate(inst);
  const Eigen::Index n = inst.n();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      if (inst.Q(i, j) != 0.0) entries.emplace_back(i, j);

  os << "qubo " << to_string(inst.convention) << ' ' << n << ' '
     << entries.size() << '\n';
  if (!inst.name.empty()) os << "# name = " << inst.name << '\n';
  for (const auto& [k, v] : inst.metadata)
    if (k != "name") os << "# " << k << " = " << v << '\n';
  for (const auto& [i, j] : entries)
    os << i << ' ' << j << ' ' << detail::format_double(inst.Q(i, j)) << '\n';
  if (inst.has_linear())
    for (Eigen::Index i = 0; i < n; ++i)
      if (inst.linear[i] != 0.0)
        os << "linear " << i << ' ' << detail::format_double(inst.linear[i])
           << '\n';
  if (!os) throw io_error("write_instance: stream failure");
}

inline void write_instance(const std::string& path, const QuboInstance& inst) {
  std::ofstream f(path);
  if (!f) throw io_error("write_instance: cannot open '" + path + "'");
  write_instance(f, inst);
  f.flush();
  if (!f) throw io_error("write_instance: write failure on '" + path + "'");
}

inline QuboInstance read_instance(std::istream& is) {
  std::string line;
  // header: first non-blank, non-comment line
  std::string header;
  while (std::getline(is, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = t;
    break;
  }
  if (header.empty()) throw parse_error("read_instance: malformed header");

  std::istringstream hs(header);
  std::string magic, conv;
  long long n = -1, nnz = -1;
  if (!(hs >> magic >> conv >> n >> nnz) || magic != "qubo" || n < 1 ||
      nnz < 0 || (conv != "pm1" && conv != "01")) {
    throw parse_error("read_instance: malformed header '" + header + "'");
  }
  std::string rest;
  if (hs >> rest) throw parse_error("read_instance: malformed header");

  QuboInstance inst;
  inst.convention = conv == "pm1" ? Convention::PlusMinusOne
                                  : Convention::ZeroOne;
  inst.Q = Eigen::MatrixXd::Zero(n, n);
  // tracks which (i, j) pairs were set, to detect conflicting duplicates
  std::vector<bool> set(static_cast<std::size_t>(n) * n, false);
  long long seen = 0;

  while (std::getline(is, line)) {
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto eq = t.find('=');
      if (eq != std::string::npos) {
        const std::string key = detail::trim(t.substr(1, eq - 1));
        const std::string val = detail::trim(t.substr(eq + 1));
        if (!key.empty()) {
          if (key == "name")
            inst.name = val;
          else
            inst.metadata[key] = val;
        }
      }
      continue;
    }
    std::istringstream ls(t);
    std::string first;
    ls >> first;
    if (first == "linear") {
      if (inst.convention != Convention::ZeroOne)
        throw parse_error(
            "read_instance: linear terms require the 01 convention");
      std::string si, sv;
      if (!(ls >> si >> sv) || (ls >> rest))
        throw parse_error("read_instance: malformed linear line '" + t + "'");
      long long i;
      double v;
      if (!detail::parse_index(si, i) || !detail::parse_double(sv, v))
        throw parse_error("read_instance: malformed linear line '" + t + "'");
      if (i < 0 || i >= n)
        throw index_error("read_instance: linear index out of range");
      if (inst.linear.size() == 0) inst.linear = Eigen::VectorXd::Zero(n);
      inst.linear[i] = v;
      continue;
    }
    // entry line: i j value
    std::string sj, sv;
    if (!(ls >> sj >> sv) || (ls >> rest))
      throw parse_error("read_instance: malformed entry line '" + t + "'");
    long long i, j;
    double v;
    if (!detail::parse_index(first, i) || !detail::parse_index(sj, j) ||
        !detail::parse_double(sv, v))
      throw parse_error("read_instance: malformed entry line '" + t + "'");
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw index_error("read_instance: entry index out of range");
    if (i > j)
      throw parse_error("read_instance: entries must satisfy i <= j");
    if (seen >= nnz)
      throw parse_error("read_instance: more entries than declared");
    const std::size_t flat = static_cast<std::size_t>(i) * n + j;
    if (set[flat] && inst.Q(i, j) != v)
      throw asymmetry_error("read_instance: conflicting values for entry (" +
                            std::to_string(i) + ", " + std::to_string(j) +
                            ")");
    set[flat] = true;
    inst.Q(i, j) = v;
    inst.Q(j, i) = v;
    ++seen;
  }
  if (seen != nnz)
    throw parse_error("read_instance: expected " + std::to_string(nnz) +
                      " entries, found " + std::to_string(seen));
  validate(inst);
  return inst;
}

inline QuboInstance read_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("read_instance: cannot open '" + path + "'");
  return read_instance(f);
}

}  // namespace demqubo
