#pragma once

// Random-hyperplane rounding of factor matrices, the closed-form expectation
// of the rounded objective, and exact rank-2 partition enumeration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "demqubo/factor.hpp"
#include "demqubo/qubo.hpp"
#include "demqubo/rng.hpp"

namespace demqubo {

struct RoundingResult {
  SignVector best_x;
  double best_value;
  std::vector<double> trial_values;
};

namespace detail {
// (value, then lexicographic) comparison used to keep rounding results
// independent of trial evaluation order
inline bool rounding_better(double v, const SignVector& x, double best_v,
                            const SignVector& best_x) {
  if (v != best_v) return v < best_v;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != best_x[i]) return x[i] < best_x[i];
  return false;
}
}  // namespace detail

// Sign-rounds F along `trials` random hyperplanes: x = sgn(F psi) with
// psi ~ N(0, I_k) and sgn(0) := +1.  Trial t draws from substream(seed, t),
// so results are reproducible and independent of evaluation order; ties in
// value resolve toward the lexicographically smaller vector.
inline RoundingResult gw_round(const QuboInstance& inst, const FactorMatrix& F,
                               int trials, std::uint64_t seed) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument("gw_round: requires the +/-1 convention");
  check_factor(F, inst.n());
  if (trials < 1) throw std::invalid_argument("gw_round: trials must be >= 1");

  const Eigen::Index n = inst.n();
  const Eigen::Index k = F.cols();
  RoundingResult out;
  out.trial_values.resize(trials);
  out.best_value = std::numeric_limits<double>::infinity();

  Eigen::VectorXd psi(k), xi(n), x(n), h(n);
  for (int t = 0; t < trials; ++t) {
    rng::NormalSampler normal(rng::substream(seed, static_cast<std::uint64_t>(t)));
    for (Eigen::Index c = 0; c < k; ++c) psi[c] = normal();
    xi.noalias() = F * psi;
    for (Eigen::Index i = 0; i < n; ++i) x[i] = xi[i] >= 0.0 ? 1.0 : -1.0;
    h.noalias() = inst.Q * x;
    const double v = x.dot(h);
    out.trial_values[t] = v;
    if (out.best_x.size() == 0 ||
        detail::rounding_better(v, x, out.best_value, out.best_x)) {
      out.best_value = v;
      out.best_x = x;
    }
  }
  return out;
}

// E_psi[ x^T Q x ] for x = sgn(F psi):  (2/pi) <Q, arcsin(F F^T)> with the
// Gram entries clamped to [-1, 1] against rounding noise.
inline double expected_value(const QuboInstance& inst, const FactorMatrix& F) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument("expected_value: requires +/-1 convention");
  check_factor(F, inst.n());
  const Eigen::Index n = inst.n();
  Eigen::MatrixXd X(n, n);
  X.setZero();
  X.selfadjointView<Eigen::Lower>().rankUpdate(F);
  // sgn(.)^2 = 1, so E[x_j^2] = 1 and the diagonal contributes Q_jj exactly;
  // evaluating asin at X_jj = 1 +/- ulp would amplify rounding by sqrt(ulp)
  double off = 0.0, diag = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    diag += inst.Q(j, j);
    for (Eigen::Index i = j + 1; i < n; ++i)
      off += inst.Q(i, j) * std::asin(std::clamp(X(i, j), -1.0, 1.0));
  }
  return (4.0 / std::numbers::pi) * off + diag;
}

// Exact best over every sign pattern a rank-2 factor can produce under
// hyperplane rounding.  Rows of F are points on the unit circle; as the
// hyperplane normal sweeps a full turn each point flips twice, giving at
// most 2n open arcs.  Evaluates the pattern on each arc midpoint plus each
// boundary angle (where sgn(0) = +1 breaks negation symmetry), in both
// half-turns: O(n log n) enumeration, O(n^2) evaluation per pattern.
inline std::pair<SignVector, double> hyperplane_partitions_rank2(
    const QuboInstance& inst, const FactorMatrix& F) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument(
        "hyperplane_partitions_rank2: requires +/-1 convention");
  check_factor(F, inst.n());
  if (F.cols() != 2)
    throw std::invalid_argument("hyperplane_partitions_rank2: rank must be 2");

  const Eigen::Index n = inst.n();
  const double pi = std::numbers::pi;
  std::vector<double> theta(n);
  for (Eigen::Index i = 0; i < n; ++i) theta[i] = std::atan2(F(i, 1), F(i, 0));

  // flip events of x_i(phi) = sgn(cos(theta_i - phi)), folded into [0, pi)
  std::vector<double> events(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double a = std::fmod(theta[i] + 0.5 * pi, pi);
    if (a < 0.0) a += pi;
    events[i] = a;
  }
  std::sort(events.begin(), events.end());

  std::vector<double> candidates;
  candidates.reserve(4 * n);
  for (Eigen::Index e = 0; e < n; ++e) {
    const double next = e + 1 < n ? events[e + 1] : events[0] + pi;
    const double mid = 0.5 * (events[e] + next);
    candidates.push_back(events[e]);
    candidates.push_back(mid);
    candidates.push_back(events[e] + pi);
    candidates.push_back(mid + pi);
  }

  SignVector best_x;
  double best_v = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x(n);
  for (const double phi : candidates) {
    for (Eigen::Index i = 0; i < n; ++i)
      x[i] = std::cos(theta[i] - phi) >= 0.0 ? 1.0 : -1.0;
    const double v = x.dot(inst.Q * x);
    if (best_x.size() == 0 || detail::rounding_better(v, x, best_v, best_x)) {
      best_v = v;
      best_x = x;
    }
  }
  return {best_x, best_v};
}

}  // namespace demqubo
