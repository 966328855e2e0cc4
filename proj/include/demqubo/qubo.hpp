#pragma once

// Core QUBO instance type, objective evaluation, convention conversions,
// problem reductions (max-cut, subset-sum), random instance generation and
// exact enumeration for small n.
//
// Two conventions are supported:
//   PlusMinusOne:  minimize x^T Q x over x in {-1,+1}^n  (no linear part)
//   ZeroOne:       minimize x^T Q x + b^T x over x in {0,1}^n
// Q is stored dense and must be bitwise symmetric.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "demqubo/rng.hpp"

namespace demqubo {

enum class Convention { PlusMinusOne, ZeroOne };

inline const char* to_string(Convention c) {
  return c == Convention::PlusMinusOne ? "pm1" : "01";
}

// Sign vectors hold entries that are exactly -1.0 or +1.0 (PlusMinusOne
// convention); ZeroOne solutions hold exactly 0.0 or 1.0.
using SignVector = Eigen::VectorXd;

inline bool is_sign_vector(const Eigen::VectorXd& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != 1.0 && x[i] != -1.0) return false;
  return true;
}

inline bool is_binary_vector(const Eigen::VectorXd& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != 0.0 && x[i] != 1.0) return false;
  return true;
}

struct QuboInstance {
  Convention convention = Convention::PlusMinusOne;
  Eigen::MatrixXd Q;       // n x n, symmetric
  Eigen::VectorXd linear;  // size 0, or size n under ZeroOne
  std::string name;
  std::map<std::string, std::string> metadata;

  Eigen::Index n() const { return Q.rows(); }
  bool has_linear() const { return linear.size() > 0; }
};

// Throws std::invalid_argument if the instance violates its invariants
// (square bitwise-symmetric Q; linear part only under ZeroOne and sized n).
inline void validate(const QuboInstance& inst) {
  if (inst.Q.rows() != inst.Q.cols())
    throw std::invalid_argument("QuboInstance: Q must be square");
  if (inst.Q.rows() < 1)
    throw std::invalid_argument("QuboInstance: n must be at least 1");
  for (Eigen::Index i = 0; i < inst.Q.rows(); ++i)
    for (Eigen::Index j = i + 1; j < inst.Q.cols(); ++j)
      if (inst.Q(i, j) != inst.Q(j, i))
        throw std::invalid_argument("QuboInstance: Q must be symmetric");
  if (inst.has_linear()) {
    if (inst.convention != Convention::ZeroOne)
      throw std::invalid_argument(
          "QuboInstance: linear part only valid under the 0/1 convention");
    if (inst.linear.size() != inst.Q.rows())
      throw std::invalid_argument("QuboInstance: linear part has wrong size");
  }
}

// x^T Q x (+ b^T x under ZeroOne).  x must hold exact +/-1 entries
// (PlusMinusOne) or exact 0/1 entries (ZeroOne).
inline double objective(const QuboInstance& inst, const Eigen::VectorXd& x) {
  if (x.size() != inst.n())
    throw std::invalid_argument("objective: dimension mismatch");
  if (inst.convention == Convention::PlusMinusOne) {
    if (!is_sign_vector(x))
      throw std::invalid_argument("objective: entries must be exactly +/-1");
  } else if (!is_binary_vector(x)) {
    throw std::invalid_argument("objective: entries must be exactly 0/1");
  }
  double v = x.dot(inst.Q * x);
  if (inst.has_linear()) v += inst.linear.dot(x);
  return v;
}

namespace detail {
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Convention conversions
// ---------------------------------------------------------------------------

// Homogenize a ZeroOne instance into an (n+1)-variable PlusMinusOne instance.
// With M = Q + diag(b) and z = (1, 2x - 1), the identity
//   x^T Q x + b^T x = (1/4) z^T [[1^T M 1, (M 1)^T], [M 1, M]] z
// holds, so objectives agree exactly.  Coordinate 0 of the lifted instance is
// the homogenization pin: candidate solutions z with z_0 = -1 must be negated
// before mapping back (the lifted objective is negation-invariant).
inline QuboInstance to_plus_minus_one(const QuboInstance& inst) {
  validate(inst);
  if (inst.convention != Convention::ZeroOne)
    throw std::invalid_argument("to_plus_minus_one: instance is already +/-1");
  const Eigen::Index n = inst.n();
  Eigen::MatrixXd M = inst.Q;
  if (inst.has_linear()) M.diagonal() += inst.linear;
  const Eigen::VectorXd r = M * Eigen::VectorXd::Ones(n);
  QuboInstance out;
  out.convention = Convention::PlusMinusOne;
  out.Q.resize(n + 1, n + 1);
  out.Q(0, 0) = 0.25 * r.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = 0.25 * r[i];
    out.Q(0, i + 1) = v;
    out.Q(i + 1, 0) = v;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.Q(i + 1, j + 1) = 0.25 * M(i, j);
  out.name = inst.name;
  out.metadata = inst.metadata;
  out.metadata["homogenized"] = "1";
  out.metadata["pinned_index"] = "0";
  return out;
}

// Map a solution of to_plus_minus_one(inst) back to the original 0/1
// variables.  Negates first when the pinned coordinate came out -1.
inline Eigen::VectorXd zero_one_solution(const SignVector& z) {
  if (z.size() < 2)
    throw std::invalid_argument("zero_one_solution: lifted vector too short");
  if (!is_sign_vector(z))
    throw std::invalid_argument("zero_one_solution: entries must be +/-1");
  const double flip = z[0] < 0 ? -1.0 : 1.0;
  Eigen::VectorXd x(z.size() - 1);
  for (Eigen::Index i = 0; i + 1 < z.size(); ++i)
    x[i] = flip * z[i + 1] > 0 ? 1.0 : 0.0;
  return x;
}

// Rewrite a PlusMinusOne instance over 0/1 variables via y = 2x - 1:
//   y^T Q y = 4 x^T (Q - diag(Q 1)) x + 1^T Q 1.
// The additive constant is stored under metadata key "objective_offset".
inline QuboInstance to_zero_one(const QuboInstance& inst) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument("to_zero_one: instance is already 0/1");
  const Eigen::Index n = inst.n();
  QuboInstance out;
  out.convention = Convention::ZeroOne;
  out.Q = 4.0 * inst.Q;
  const Eigen::VectorXd r = inst.Q * Eigen::VectorXd::Ones(n);
  out.Q.diagonal() -= 4.0 * r;
  out.name = inst.name;
  out.metadata = inst.metadata;
  out.metadata["objective_offset"] = detail::format_double(inst.Q.sum());
  return out;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

struct WeightedGraph {
  struct Edge {
    Eigen::Index i, j;
    double w;
  };
  Eigen::Index n = 0;
  std::vector<Edge> edges;  // i < j, no self-loops, no duplicate pairs
};

inline void validate(const WeightedGraph& g) {
  if (g.n < 1) throw std::invalid_argument("WeightedGraph: n must be >= 1");
  std::vector<std::pair<Eigen::Index, Eigen::Index>> seen;
  seen.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    if (e.i < 0 || e.j < 0 || e.i >= g.n || e.j >= g.n)
      throw std::invalid_argument("WeightedGraph: vertex index out of range");
    if (e.i >= e.j)
      throw std::invalid_argument(
          "WeightedGraph: edges must satisfy i < j (no self-loops)");
    seen.emplace_back(e.i, e.j);
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw std::invalid_argument("WeightedGraph: duplicate edge");
}

// Max-cut as a +/-1 QUBO: Q = W/4 with the constant 1^T W 1 / 4 recorded
// under "objective_offset".  For any x, cut weight = offset - objective(x).
inline QuboInstance from_maxcut(const WeightedGraph& g) {
  validate(g);
  QuboInstance out;
  out.convention = Convention::PlusMinusOne;
  out.Q = Eigen::MatrixXd::Zero(g.n, g.n);
  for (const auto& e : g.edges) {
    out.Q(e.i, e.j) = 0.25 * e.w;
    out.Q(e.j, e.i) = 0.25 * e.w;
  }
  out.name = "maxcut";
  out.metadata["objective_offset"] = detail::format_double(out.Q.sum());
  return out;
}

// Subset-sum / number partitioning: Q = w w^T, so objective(x) = <w, x>^2.
inline QuboInstance from_subset_sum(const Eigen::VectorXd& w) {
  if (w.size() < 1)
    throw std::invalid_argument("from_subset_sum: need at least one weight");
  QuboInstance out;
  out.convention = Convention::PlusMinusOne;
  out.Q = w * w.transpose();
  out.name = "subset-sum";
  return out;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

// Dense Gaussian instance: upper-triangle entries (diagonal included) are
// i.i.d. standard normal, mirrored to the lower triangle.
inline QuboInstance gen_random_gaussian(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_random_gaussian: n must be >= 1");
  rng::NormalSampler normal(rng::substream(seed, 0));
  QuboInstance out;
  out.convention = Convention::PlusMinusOne;
  out.Q.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = normal();
      out.Q(i, j) = v;
      out.Q(j, i) = v;
    }
  out.name = "random-n" + std::to_string(n) + "-s" + std::to_string(seed);
  return out;
}

// ---------------------------------------------------------------------------
// Single-flip algebra (shared by local-search solvers and enumeration)
// ---------------------------------------------------------------------------

// Objective change of flipping x_i -> -x_i given the field h = Q x:
//   E(flip) - E(x) = 4 Q_ii - 4 x_i h_i.
inline double flip_delta(const QuboInstance& inst, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h, Eigen::Index i) {
  return 4.0 * inst.Q(i, i) - 4.0 * x[i] * h[i];
}

// Applies the flip and keeps h = Q x consistent (O(n)).
inline void apply_flip(const QuboInstance& inst, Eigen::VectorXd& x,
                       Eigen::VectorXd& h, Eigen::Index i) {
  x[i] = -x[i];
  h += (2.0 * x[i]) * inst.Q.col(i);
}

// ---------------------------------------------------------------------------
// Exact minimum by enumeration (PlusMinusOne, small n)
// ---------------------------------------------------------------------------

// Enumerates half the cube (x_{n-1} pinned to +1; the objective is
// negation-invariant since there is no linear part) in Gray-code order,
// maintaining h = Q x and re-evaluating E = x.h at each step.  Ties are
// broken toward the lexicographically smaller vector.  Practical to n ~ 26.
inline std::pair<double, SignVector> brute_force_min(const QuboInstance& inst) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument(
        "brute_force_min: convert to the +/-1 convention first");
  const Eigen::Index n = inst.n();
  if (n > 26)
    throw std::invalid_argument("brute_force_min: n too large to enumerate");

  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd h = inst.Q * x;
  double best = x.dot(h);
  SignVector best_x = x;
  const auto lex_less = [](const SignVector& a, const SignVector& b) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      if (a[k] != b[k]) return a[k] < b[k];
    }
    return false;
  };
  const std::uint64_t count = n == 1 ? 1 : (std::uint64_t{1} << (n - 1));
  for (std::uint64_t s = 1; s < count; ++s) {
    const int i = std::countr_zero(s);  // reflected Gray code flip index
    x[i] = -x[i];
    h += (2.0 * x[i]) * inst.Q.col(i);
    const double v = x.dot(h);
    if (v < best || (v == best && lex_less(x, best_x))) {
      best = v;
      best_x = x;
    }
  }
  return {best, best_x};
}

}  // namespace demqubo
