#pragma once

// Direct expectation minimization.
//
// dem_rc:    projected Riemannian gradient descent on Phi over row-normalized
//            n x r factors with boundary clipping, followed by hyperplane
//            rounding.
// exact_dem: direction-subproblem descent; each iteration assembles the cone
//            surrogate at the current point (linearized at the previous
//            direction), solves it, and retracts a step of length eta along
//            the returned direction.
// dc_minimize: generic difference-of-convex scheme, f = g - h with convex g
//            and h: linearize h at the current iterate, minimize exactly.

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "demqubo/expectation.hpp"
#include "demqubo/factor.hpp"
#include "demqubo/qubo.hpp"
#include "demqubo/rounding.hpp"
#include "demqubo/subproblem.hpp"
#include "demqubo/trace.hpp"

namespace demqubo {

namespace detail {
// Phi from a Gram matrix whose lower triangle is filled
inline double phi_from_gram(const QuboInstance& inst,
                            const Eigen::MatrixXd& X) {
  const Eigen::Index n = inst.n();
  double off = 0.0, diag = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    diag += inst.Q(j, j) * std::asin(std::clamp(X(j, j), -1.0, 1.0));
    for (Eigen::Index i = j + 1; i < n; ++i)
      off += inst.Q(i, j) * std::asin(std::clamp(X(i, j), -1.0, 1.0));
  }
  return (2.0 / std::numbers::pi) * (2.0 * off + diag);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Rank-constrained descent
// ---------------------------------------------------------------------------

struct DemRcParams {
  Eigen::Index rank = 10;
  int steps = 500;
  int rounds = 100;       // hyperplane rounding trials after the descent
  double eta = 0.01;
  double eps_clip = 0.05;  // bounds gradient entries by |Q_ij|/sqrt(2*eps)
  std::uint64_t seed = 0;
};

struct DemRcResult {
  FactorMatrix F;
  RoundingResult rounding;
  Trace trace;  // (iteration, Phi, ||riemannian gradient||_F, seconds)
};

// Seed streams: substream(seed, 0) initializes F; derive_seed(seed, 1) seeds
// the rounding trials (one substream per trial inside gw_round).
inline DemRcResult dem_rc(const QuboInstance& inst, const DemRcParams& p) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument("dem_rc: requires the +/-1 convention");
  if (p.rank < 1 || p.rank > inst.n())
    throw std::invalid_argument("dem_rc: need 1 <= rank <= n");
  if (p.steps < 0) throw std::invalid_argument("dem_rc: steps must be >= 0");
  if (!(p.eta > 0.0)) throw std::invalid_argument("dem_rc: eta must be > 0");

  const detail::Stopwatch clock;
  const Eigen::Index n = inst.n();
  const Eigen::Index k = p.rank;
  const double hi = 1.0 - p.eps_clip;

  DemRcResult out;
  out.F = random_factor(n, k, rng::derive_seed(p.seed, 0));
  out.trace.reserve(p.steps + 1);

  Eigen::MatrixXd X(n, n), W(n, n), G(n, k);
  for (int t = 0; t <= p.steps; ++t) {
    X.setZero();
    X.selfadjointView<Eigen::Lower>().rankUpdate(out.F);
    const double value = detail::phi_from_gram(inst, X);

    // Euclidean gradient (4/pi)(Q ./ sqrt(1 - clip(X)^2)) F, tangent-projected
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j; i < n; ++i) {
        const double c = std::clamp(X(i, j), -hi, hi);
        const double w = inst.Q(i, j) / std::sqrt(1.0 - c * c);
        W(i, j) = w;
        W(j, i) = w;
      }
    G.noalias() = (4.0 / std::numbers::pi) * (W * out.F);
    for (Eigen::Index i = 0; i < n; ++i)
      G.row(i) -= out.F.row(i).dot(G.row(i)) * out.F.row(i);

    out.trace.push_back({t, value, G.norm(), clock.seconds()});
    if (t == p.steps) break;

    out.F -= p.eta * G;
    normalize_rows(out.F);
  }

  out.rounding = gw_round(inst, out.F, p.rounds, rng::derive_seed(p.seed, 1));
  return out;
}

// ---------------------------------------------------------------------------
// Exact DEM (direction subproblem per iteration)
// ---------------------------------------------------------------------------

struct ExactDemParams {
  double eta = 0.2;
  double tol = 1e-6;       // stop when ||D||_F drops below this
  int max_iter = 100;
  double eps_boundary = 1e-7;
  std::uint64_t seed = 0;  // seeds the initial linearization direction
  bool backtracking = true;
  int max_halvings = 20;
  // Directions only need descent-grade accuracy, so the default inner
  // tolerance is looser than the solver's own: the primal-dual iteration
  // can ring around a cone kink at ~1e-6 without that affecting descent.
  SolveOptions socp{20000, 1e-5};
};

struct ExactDemResult {
  FactorMatrix F;
  Trace trace;  // (iteration, Phi, ||D||_F, seconds)
  int iterations;
  bool converged;
};

inline ExactDemResult exact_dem(const QuboInstance& inst,
                                const FactorMatrix& F0,
                                const ExactDemParams& p) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument("exact_dem: requires the +/-1 convention");
  check_factor(F0, inst.n());
  if (!(p.eta > 0.0)) throw std::invalid_argument("exact_dem: eta must be > 0");

  const detail::Stopwatch clock;
  ExactDemResult out;
  out.F = F0;
  out.iterations = 0;
  out.converged = false;

  // first linearization point: random tangent direction, unit Frobenius norm
  Eigen::MatrixXd D_prev =
      random_factor(F0.rows(), F0.cols(), rng::derive_seed(p.seed, 0));
  D_prev = riemannian_project(out.F, D_prev);
  if (D_prev.norm() > 0.0) D_prev /= D_prev.norm();

  for (int t = 1; t <= p.max_iter; ++t) {
    const DirectionProblem dp =
        assemble(inst, out.F, &D_prev, p.eps_boundary);
    const SubproblemResult sub = solve(dp, p.socp);
    if (!sub.converged)
      throw solver_error(
          "exact_dem: direction subproblem did not converge (residuals " +
          std::to_string(sub.primal_residual) + ", " +
          std::to_string(sub.dual_residual) + ")");
    out.iterations = t;
    const double dn = sub.D.norm();
    if (dn < p.tol) {
      out.trace.push_back({t, phi(inst, out.F), dn, clock.seconds()});
      out.converged = true;
      break;
    }
    const double phi_cur = phi(inst, out.F);
    double eta = p.eta;
    FactorMatrix F_try = out.F + eta * sub.D;
    normalize_rows(F_try);
    if (p.backtracking) {
      int halvings = 0;
      while (phi(inst, F_try) > phi_cur && halvings < p.max_halvings) {
        eta *= 0.5;
        ++halvings;
        F_try = out.F + eta * sub.D;
        normalize_rows(F_try);
      }
    }
    out.F = F_try;
    D_prev = sub.D;
    out.trace.push_back({t, phi(inst, out.F), dn, clock.seconds()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generic DC scheme
// ---------------------------------------------------------------------------

struct DcProblem {
  // value of the convex part g
  std::function<double(const Eigen::VectorXd&)> g_value;
  // exact solver of argmin_x g(x) - <y, x>
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g_argmin_linear;
  // value and a subgradient of the convex part h
  std::function<double(const Eigen::VectorXd&)> h_value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> h_subgradient;
};

struct DcResult {
  Eigen::VectorXd x;
  std::vector<double> values;  // (g - h)(x_k) for k = 0..N
};

// x_k = argmin_x g(x) - <grad h(x_{k-1}), x>.  The recorded value sequence is
// non-increasing: each step minimizes a convex majorizer that is tight at the
// previous iterate.
inline DcResult dc_minimize(const DcProblem& prob, const Eigen::VectorXd& x0,
                            int iterations) {
  if (iterations < 0)
    throw std::invalid_argument("dc_minimize: iterations must be >= 0");
  DcResult out;
  out.x = x0;
  out.values.reserve(iterations + 1);
  out.values.push_back(prob.g_value(out.x) - prob.h_value(out.x));
  for (int t = 0; t < iterations; ++t) {
    const Eigen::VectorXd y = prob.h_subgradient(out.x);
    out.x = prob.g_argmin_linear(y);
    out.values.push_back(prob.g_value(out.x) - prob.h_value(out.x));
  }
  return out;
}

}  // namespace demqubo
