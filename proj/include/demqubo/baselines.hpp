#pragma once

// Classical baselines: single-flip simulated annealing, tabu search,
// ballistic simulated bifurcation, rank-2 torus descent (Burer-style) with
// exact partition rounding, and a Burer-Monteiro surrogate of the SDP
// relaxation followed by hyperplane rounding.
//
// All solvers are deterministic given (instance, params, seed), re-verify the
// returned value against the returned vector, and record best-seen traces.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "demqubo/factor.hpp"
#include "demqubo/qubo.hpp"
#include "demqubo/rounding.hpp"
#include "demqubo/rng.hpp"
#include "demqubo/trace.hpp"

namespace demqubo {

struct SolverResult {
  SignVector x;
  double value;
  Trace trace;
};

namespace detail {
inline void require_pm1(const QuboInstance& inst, const char* who) {
  validate(inst);
  if (inst.convention != Convention::PlusMinusOne)
    throw std::invalid_argument(std::string(who) +
                                ": requires the +/-1 convention");
}

inline SignVector random_signs(Eigen::Index n, rng::Xoshiro256pp& g) {
  SignVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = (g() >> 63) ? 1.0 : -1.0;
  return x;
}

inline void fisher_yates(std::vector<Eigen::Index>& order,
                         rng::Xoshiro256pp& g) {
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng::bounded(g, i)]);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Simulated annealing
// ---------------------------------------------------------------------------

inline bool metropolis_accept(double delta, double temperature,
                              rng::Xoshiro256pp& g) {
  if (delta <= 0.0) return true;
  if (!(temperature > 0.0)) return false;
  return rng::uniform01(g) < std::exp(-delta / temperature);
}

struct SaParams {
  int sweeps = 1000;
  double t0 = 0.0;     // <= 0: n * max|Q_ij|
  double alpha = 0.0;  // <= 0: solved from alpha^sweeps = 1e-3
  std::uint64_t seed = 0;
};

// Single-flip Metropolis annealing with a geometric per-sweep schedule.
// Each sweep visits all n variables in a fresh random order; move deltas are
// maintained incrementally through the field vector h = Q x.
inline SolverResult simulated_annealing(const QuboInstance& inst,
                                        const SaParams& p) {
  detail::require_pm1(inst, "simulated_annealing");
  if (p.sweeps < 1)
    throw std::invalid_argument("simulated_annealing: sweeps must be >= 1");
  const Eigen::Index n = inst.n();
  const double t0 =
      p.t0 > 0.0 ? p.t0
                 : static_cast<double>(n) *
                       inst.Q.cwiseAbs().maxCoeff();
  const double alpha =
      p.alpha > 0.0 ? p.alpha : std::pow(1e-3, 1.0 / p.sweeps);

  const detail::Stopwatch clock;
  rng::Xoshiro256pp g = rng::substream(p.seed, 0);
  SignVector x = detail::random_signs(n, g);
  Eigen::VectorXd h = inst.Q * x;
  double energy = x.dot(h);
  SignVector best_x = x;
  double best = objective(inst, best_x);

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  SolverResult out;
  out.trace.reserve(p.sweeps);
  double temperature = t0;
  for (int sweep = 0; sweep < p.sweeps; ++sweep) {
    detail::fisher_yates(order, g);
    for (const Eigen::Index i : order) {
      const double delta = flip_delta(inst, x, h, i);
      if (metropolis_accept(delta, temperature, g)) {
        apply_flip(inst, x, h, i);
        energy += delta;
        if (energy < best) {
          const double exact = objective(inst, x);
          if (exact < best) {
            best = exact;
            best_x = x;
          }
        }
      }
    }
    out.trace.push_back({sweep, best, temperature, clock.seconds()});
    temperature *= alpha;
  }
  out.x = best_x;
  out.value = best;
  return out;
}

// ---------------------------------------------------------------------------
// Tabu search
// ---------------------------------------------------------------------------

struct TabuParams {
  int iterations = 2000;
  int tenure = 10;
  std::uint64_t seed = 0;
};

struct TabuMove {
  Eigen::Index var;
  bool was_tabu;
  bool aspirated;  // tabu move allowed because it beat the best seen
  bool forced;     // every move was tabu and none aspirated
};

struct TabuResult {
  SignVector x;
  double value;
  Trace trace;
  std::vector<TabuMove> moves;
};

// Best-improvement single-flip tabu search.  A flipped variable is tabu for
// `tenure` subsequent iterations unless flipping it would beat the best
// value seen (aspiration); if every move is tabu and none aspirates, the
// least-bad tabu move is taken.
inline TabuResult tabu_search(const QuboInstance& inst, const TabuParams& p) {
  detail::require_pm1(inst, "tabu_search");
  if (p.iterations < 0)
    throw std::invalid_argument("tabu_search: iterations must be >= 0");
  if (p.tenure < 1)
    throw std::invalid_argument("tabu_search: tenure must be >= 1");
  const Eigen::Index n = inst.n();

  const detail::Stopwatch clock;
  rng::Xoshiro256pp g = rng::substream(p.seed, 0);
  SignVector x = detail::random_signs(n, g);
  Eigen::VectorXd h = inst.Q * x;
  double energy = x.dot(h);
  SignVector best_x = x;
  double best = objective(inst, best_x);

  std::vector<std::int64_t> tabu_until(n, -1);  // tabu while t < tabu_until

  TabuResult out;
  out.trace.reserve(p.iterations);
  out.moves.reserve(p.iterations);
  for (std::int64_t t = 0; t < p.iterations; ++t) {
    Eigen::Index pick = -1, pick_any = -1;
    double pick_delta = std::numeric_limits<double>::infinity();
    double pick_any_delta = std::numeric_limits<double>::infinity();
    bool pick_aspirated = false, pick_was_tabu = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double delta = flip_delta(inst, x, h, i);
      if (delta < pick_any_delta) {
        pick_any_delta = delta;
        pick_any = i;
      }
      const bool tabu = t < tabu_until[i];
      const bool aspirates = energy + delta < best;
      if (tabu && !aspirates) continue;
      if (delta < pick_delta) {
        pick_delta = delta;
        pick = i;
        pick_aspirated = tabu && aspirates;
        pick_was_tabu = tabu;
      }
    }
    bool forced = false;
    if (pick < 0) {  // all moves tabu, none aspirates: best tabu move
      pick = pick_any;
      pick_delta = pick_any_delta;
      pick_was_tabu = true;
      forced = true;
    }
    apply_flip(inst, x, h, pick);
    energy += pick_delta;
    tabu_until[pick] = t + 1 + p.tenure;
    if (energy < best) {
      const double exact = objective(inst, x);
      if (exact < best) {
        best = exact;
        best_x = x;
      }
    }
    out.moves.push_back({pick, pick_was_tabu, pick_aspirated, forced});
    out.trace.push_back({t, best, energy, clock.seconds()});
  }
  out.x = best_x;
  out.value = best;
  return out;
}

// ---------------------------------------------------------------------------
// Simulated bifurcation
// ---------------------------------------------------------------------------

// Spectral radius of a symmetric matrix by power iteration on J^2 (immune to
// +/- eigenvalue pairs); deterministic seeded start vector.
inline double spectral_radius(const Eigen::MatrixXd& J, int max_iter = 5000,
                              double tol = 1e-13) {
  if (J.rows() != J.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  const Eigen::Index n = J.rows();
  rng::NormalSampler normal(rng::substream(0x5b5b5b5bULL, 0));
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  double vn = v.norm();
  if (vn == 0.0) return 0.0;
  v /= vn;
  double rho2 = 0.0;
  for (int t = 0; t < max_iter; ++t) {
    Eigen::VectorXd w = J * (J * v);
    const double r = v.dot(w);  // Rayleigh quotient of J^2
    const double wn = w.norm();
    if (wn < 1e-300) return 0.0;  // v in the kernel: J^2 v = 0
    w /= wn;
    const bool settled = std::abs(r - rho2) <= tol * std::max(1.0, std::abs(r));
    rho2 = r;
    v = w;
    if (settled && t > 2) break;
  }
  return std::sqrt(std::max(0.0, rho2));
}

struct SbParams {
  int steps = 2000;
  double lambda = 1.0;
  double gamma = 0.1;
  double dt = 0.0;        // <= 0: 0.25 / sqrt(rho(J)), or 0.25 if rho ~ 0
  double mu_start = std::numeric_limits<double>::quiet_NaN();  // lambda + 1.5 rho
  double mu_end = std::numeric_limits<double>::quiet_NaN();    // lambda - 0.5 rho
  std::uint64_t seed = 0;
};

// Final continuous amplitudes; useful for sub-bifurcation diagnostics.
struct SbTrajectory {
  Eigen::VectorXd x;  // continuous state at the last step
  SolverResult result;
};

// Ballistic simulated bifurcation:
//   xdot_i = y_i,   ydot_i = -(mu(t) - lambda) x_i + sum_j J_ij x_j - gamma y_i
// with J = -Q (diagonal zeroed), symplectic Euler steps and inelastic walls
// (|x_i| clamped to 1, velocity zeroed on contact).  A mode with eigenvalue
// nu of J is stable while mu > lambda + nu, so mu ramps linearly DOWN from
// above mu_c = lambda + rho(J): the top eigenvector bifurcates first as mu
// crosses its threshold.  Tracks the best sign pattern over the trajectory.
inline SbTrajectory simulated_bifurcation_trajectory(const QuboInstance& inst,
                                                     const SbParams& p) {
  detail::require_pm1(inst, "simulated_bifurcation");
  if (p.steps < 1)
    throw std::invalid_argument("simulated_bifurcation: steps must be >= 1");
  const detail::Stopwatch clock;
  const Eigen::Index n = inst.n();
  Eigen::MatrixXd J = -inst.Q;
  J.diagonal().setZero();
  const double rho = spectral_radius(J);
  const double dt =
      p.dt > 0.0 ? p.dt : (rho > 1e-12 ? 0.25 / std::sqrt(rho) : 0.25);
  const double mu_start =
      std::isnan(p.mu_start) ? p.lambda + 1.5 * rho : p.mu_start;
  const double mu_end = std::isnan(p.mu_end) ? p.lambda - 0.5 * rho : p.mu_end;

  rng::Xoshiro256pp g = rng::substream(p.seed, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i)
    y[i] = 0.1 * (2.0 * rng::uniform01(g) - 1.0);

  SbTrajectory out;
  SignVector best_x;
  double best = std::numeric_limits<double>::infinity();
  SignVector s(n);
  for (int t = 0; t < p.steps; ++t) {
    const double frac =
        p.steps > 1 ? static_cast<double>(t) / (p.steps - 1) : 0.0;
    const double mu = mu_start + (mu_end - mu_start) * frac;
    y += dt * (-(mu - p.lambda) * x + J * x - p.gamma * y);
    x += dt * y;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x[i] > 1.0) {
        x[i] = 1.0;
        y[i] = 0.0;
      } else if (x[i] < -1.0) {
        x[i] = -1.0;
        y[i] = 0.0;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) s[i] = x[i] >= 0.0 ? 1.0 : -1.0;
    const double v = s.dot(inst.Q * s);
    if (v < best) {
      best = v;
      best_x = s;
    }
    out.result.trace.push_back({t, best, mu, clock.seconds()});
  }
  out.x = x;
  out.result.x = best_x;
  out.result.value = objective(inst, best_x);
  return out;
}

inline SolverResult simulated_bifurcation(const QuboInstance& inst,
                                          const SbParams& p) {
  return simulated_bifurcation_trajectory(inst, p).result;
}

// ---------------------------------------------------------------------------
// Rank-2 torus descent with exact partition rounding
// ---------------------------------------------------------------------------

struct Burer2Params {
  int restarts = 10;
  int max_iters = 500;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
};

struct Burer2Result {
  SignVector x;
  double value;
  FactorMatrix F;  // rank-2 factor of the restart that produced x
  Trace trace;     // best rounded value after each restart (non-increasing)
  std::vector<std::vector<double>> descent_values;  // smooth f per restart
};

// Minimizes f(phi) = sum_ij Q_ij cos(phi_i - phi_j) over the torus by
// gradient descent with backtracking, then rounds each stationary point by
// exact rank-2 hyperplane partition enumeration; best over restarts.
inline Burer2Result burer2(const QuboInstance& inst, const Burer2Params& p) {
  detail::require_pm1(inst, "burer2");
  if (p.restarts < 1)
    throw std::invalid_argument("burer2: restarts must be >= 1");
  const detail::Stopwatch clock;
  const Eigen::Index n = inst.n();
  const double two_pi = 2.0 * std::numbers::pi;

  const auto f_and_grad = [&](const Eigen::VectorXd& phi_angles,
                              Eigen::VectorXd* grad) {
    const Eigen::VectorXd c = phi_angles.array().cos();
    const Eigen::VectorXd s = phi_angles.array().sin();
    const Eigen::VectorXd qc = inst.Q * c;
    const Eigen::VectorXd qs = inst.Q * s;
    if (grad != nullptr)
      *grad = -2.0 * (s.cwiseProduct(qc) - c.cwiseProduct(qs));
    return c.dot(qc) + s.dot(qs);
  };

  Burer2Result out;
  out.value = std::numeric_limits<double>::infinity();
  for (int r = 0; r < p.restarts; ++r) {
    rng::Xoshiro256pp g = rng::substream(p.seed, static_cast<std::uint64_t>(r));
    Eigen::VectorXd phi_angles(n);
    for (Eigen::Index i = 0; i < n; ++i)
      phi_angles[i] = two_pi * rng::uniform01(g);

    Eigen::VectorXd grad(n);
    double f = f_and_grad(phi_angles, &grad);
    std::vector<double> values{f};
    for (int it = 0; it < p.max_iters; ++it) {
      const double gn2 = grad.squaredNorm();
      if (std::sqrt(gn2) < p.grad_tol) break;
      double step = 1.0;
      bool moved = false;
      for (int halving = 0; halving < 50; ++halving) {
        const Eigen::VectorXd cand = phi_angles - step * grad;
        const double fc = f_and_grad(cand, nullptr);
        if (fc <= f - 1e-4 * step * gn2) {
          phi_angles = cand;
          f = fc;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      f = f_and_grad(phi_angles, &grad);
      values.push_back(f);
    }
    out.descent_values.push_back(std::move(values));

    FactorMatrix F(n, 2);
    F.col(0) = phi_angles.array().cos();
    F.col(1) = phi_angles.array().sin();
    normalize_rows(F);  // exact up to rounding already; re-normalize anyway
    auto [xr, vr] = hyperplane_partitions_rank2(inst, F);
    if (vr < out.value) {
      out.value = vr;
      out.x = xr;
      out.F = F;
    }
    out.trace.push_back({r, out.value, f, clock.seconds()});
  }
  out.value = objective(inst, out.x);
  return out;
}

// ---------------------------------------------------------------------------
// Burer-Monteiro surrogate of the hyperplane-rounding SDP pipeline
// ---------------------------------------------------------------------------

struct GwSurrogateParams {
  Eigen::Index rank = 0;  // <= 0: ceil(sqrt(2n))
  int steps = 500;
  int trials = 100;
  std::uint64_t seed = 0;
};

struct GwSurrogateResult {
  FactorMatrix F;
  RoundingResult rounding;
  Trace trace;  // (iteration, <Q, F F^T>, ||proj grad||_F, seconds)
  double relaxation_value;  // lower-bound estimate of the discrete minimum
};

// Riemannian descent (backtracking) on the linear relaxation objective
// <Q, F F^T> over row-normalized factors at Burer-Monteiro rank, then
// hyperplane rounding of the relaxed solution.
inline GwSurrogateResult gw_sdp_surrogate(const QuboInstance& inst,
                                          const GwSurrogateParams& p) {
  detail::require_pm1(inst, "gw_sdp_surrogate");
  const Eigen::Index n = inst.n();
  Eigen::Index rank = p.rank;
  if (rank <= 0)
    rank = std::min<Eigen::Index>(
        n, static_cast<Eigen::Index>(
               std::ceil(std::sqrt(2.0 * static_cast<double>(n)))));
  if (rank < 1 || rank > n)
    throw std::invalid_argument("gw_sdp_surrogate: need 1 <= rank <= n");
  if (p.trials < 1)
    throw std::invalid_argument("gw_sdp_surrogate: trials must be >= 1");

  const detail::Stopwatch clock;
  GwSurrogateResult out;
  out.F = random_factor(n, rank, rng::derive_seed(p.seed, 0));

  const auto value = [&](const FactorMatrix& F) {
    return (F.transpose() * inst.Q * F).trace();
  };
  double f = value(out.F);
  Eigen::MatrixXd G(n, rank);
  for (int t = 0; t <= p.steps; ++t) {
    G.noalias() = 2.0 * (inst.Q * out.F);
    for (Eigen::Index i = 0; i < n; ++i)
      G.row(i) -= out.F.row(i).dot(G.row(i)) * out.F.row(i);
    const double gn = G.norm();
    out.trace.push_back({t, f, gn, clock.seconds()});
    if (t == p.steps || gn < 1e-12 * std::max(1.0, std::abs(f))) break;

    double step = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      FactorMatrix cand = out.F - step * G;
      normalize_rows(cand);
      const double fc = value(cand);
      if (fc <= f - 1e-4 * step * gn * gn) {
        out.F = std::move(cand);
        f = fc;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  out.relaxation_value = f;
  out.rounding = gw_round(inst, out.F, p.trials, rng::derive_seed(p.seed, 1));
  return out;
}

}  // namespace demqubo
