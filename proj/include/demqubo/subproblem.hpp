#pragma once

// Steepest-descent direction subproblem at a factor point F.
//
// The one-sided derivative of Phi along a tangent direction D splits per
// pair (i < j, Q_ij != 0, alpha_ij = (2/pi) Q_ij, counted twice) into
//   interior   |X_ij| < 1:        2 alpha_ij (f_i.d_j + f_j.d_i)/sqrt(1-X_ij^2)
//   convex     X_ij = -sgn(Q_ij): 2|alpha_ij| ||d_i - sigma d_j||
//   concave    X_ij = +sgn(Q_ij): -2|alpha_ij| ||d_i - sigma d_j||
// Minimizing it over {D tangent, ||D||_F <= 1} is a DC program; linearizing
// each concave term at the previous direction (s_ij = normalized
// d_i^curr - sigma d_j^curr, or 0) leaves a second-order-cone program:
//
//   minimize  <C, D> + sum_m 2|alpha_m| ||d_im - sigma_m d_jm||
//   s.t.      <f_i, d_i> = 0 for all i,   ||D||_F <= 1.
//
// The reported objective is exactly this surrogate, which equals the true
// directional derivative whenever no concave pair is active and upper-bounds
// it otherwise.  D = 0 is always feasible with value 0, so the optimum is
// never positive.
//
// solve() runs a primal-dual splitting scheme (Chambolle-Pock): the cone
// terms are dualized blockwise, the linear term and the feasible set live in
// the primal prox, which is an exact projection (tangency rows, then the
// Frobenius ball).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "demqubo/expectation.hpp"
#include "demqubo/factor.hpp"
#include "demqubo/qubo.hpp"

namespace demqubo {

struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DirectionProblem {
  enum class PairClass { Interior, ConvexCone, ConcaveLinearized };
  struct ConeTerm {
    Eigen::Index i, j;
    double alpha;  // (2/pi) Q_ij; the cone enters J with weight 2|alpha|
    int sigma;     // boundary sign of X_ij
  };
  struct PairInfo {
    Eigen::Index i, j;
    PairClass cls;
    double alpha;
    int sigma;  // 0 for interior pairs
  };

  FactorMatrix F;
  Eigen::MatrixXd C;  // coefficients of the linear part of the surrogate
  std::vector<ConeTerm> cones;
  std::vector<PairInfo> pairs;

  Eigen::Index n() const { return F.rows(); }
  Eigen::Index k() const { return F.cols(); }
};

// Surrogate value J(D); valid for any direction, feasible or not.
inline double surrogate_value(const DirectionProblem& dp,
                              const Eigen::MatrixXd& D) {
  if (D.rows() != dp.F.rows() || D.cols() != dp.F.cols())
    throw std::invalid_argument("surrogate_value: shape mismatch");
  double v = dp.C.cwiseProduct(D).sum();
  for (const auto& c : dp.cones)
    v += 2.0 * std::abs(c.alpha) *
         (D.row(c.i) - static_cast<double>(c.sigma) * D.row(c.j)).norm();
  return v;
}

// Classifies every pair with Q_ij != 0 and builds the surrogate.  D_curr is
// the linearization point for concave boundary pairs; pass nullptr to
// linearize at 0 (subgradient 0).
inline DirectionProblem assemble(const QuboInstance& inst,
                                 const FactorMatrix& F,
                                 const Eigen::MatrixXd* D_curr = nullptr,
                                 double eps_boundary = 1e-7) {
  validate(inst);
  check_factor(F, inst.n());
  if (D_curr != nullptr &&
      (D_curr->rows() != F.rows() || D_curr->cols() != F.cols()))
    throw std::invalid_argument("assemble: linearization point shape mismatch");

  const Eigen::Index n = inst.n();
  const Eigen::Index k = F.cols();
  DirectionProblem dp;
  dp.F = F;
  dp.C = Eigen::MatrixXd::Zero(n, k);

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double q = inst.Q(i, j);
      if (q == 0.0) continue;
      const double alpha = (2.0 / std::numbers::pi) * q;
      const double x = F.row(i).dot(F.row(j));
      if (std::abs(x) < 1.0 - eps_boundary) {
        const double w = 2.0 * alpha / std::sqrt(1.0 - x * x);
        dp.C.row(i) += w * F.row(j);
        dp.C.row(j) += w * F.row(i);
        dp.pairs.push_back({i, j, DirectionProblem::PairClass::Interior,
                            alpha, 0});
        continue;
      }
      const int sigma = x > 0.0 ? 1 : -1;
      if (sigma * q < 0.0) {
        dp.cones.push_back({i, j, alpha, sigma});
        dp.pairs.push_back({i, j, DirectionProblem::PairClass::ConvexCone,
                            alpha, sigma});
      } else {
        // concave: tight linear upper bound -2|alpha| <s, d_i - sigma d_j>
        Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(k);
        if (D_curr != nullptr) {
          Eigen::RowVectorXd u =
              D_curr->row(i) - static_cast<double>(sigma) * D_curr->row(j);
          const double nu = u.norm();
          if (nu > 0.0) s = u / nu;
        }
        const double w = 2.0 * std::abs(alpha);
        dp.C.row(i) -= w * s;
        dp.C.row(j) += static_cast<double>(sigma) * w * s;
        dp.pairs.push_back(
            {i, j, DirectionProblem::PairClass::ConcaveLinearized, alpha,
             sigma});
      }
    }
  }
  return dp;
}

struct SolveOptions {
  int max_iter = 20000;
  double tol = 1e-7;  // relative to max(1, ||C||_F); see solve()
};

struct SubproblemResult {
  Eigen::MatrixXd D;
  double objective;
  int iterations;
  double primal_residual;
  double dual_residual;
  bool converged;
};

namespace detail {
// exact projection onto {tangent rows} intersected with the Frobenius ball
inline void project_feasible(const FactorMatrix& F, Eigen::MatrixXd& D) {
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    D.row(i) -= F.row(i).dot(D.row(i)) * F.row(i);
  const double nrm = D.norm();
  if (nrm > 1.0) D /= nrm;
}
}  // namespace detail

inline SubproblemResult solve(const DirectionProblem& dp,
                              const SolveOptions& opts = {}) {
  const Eigen::Index n = dp.n();
  const Eigen::Index k = dp.k();
  const std::size_t m = dp.cones.size();

  SubproblemResult res;
  res.D = Eigen::MatrixXd::Zero(n, k);
  res.iterations = 0;
  res.primal_residual = 0.0;
  res.dual_residual = 0.0;
  res.converged = false;

  // Residuals are reported and tested relative to the data scale: interior
  // pairs sitting just inside the boundary contribute O(1/sqrt(1-x^2))
  // weights to C, so an absolute tolerance would be unreachable on one
  // problem and trivial on another.
  const double scale = std::max(1.0, dp.C.norm());

  if (m == 0) {
    // pure linear objective: projected gradient with a scale-free step
    const double cn = dp.C.norm();
    const double tau = 2.0 / std::max(cn, 1e-12);
    Eigen::MatrixXd D = res.D, Dn;
    for (int t = 0; t < opts.max_iter; ++t) {
      Dn = D - tau * dp.C;
      detail::project_feasible(dp.F, Dn);
      res.primal_residual = (D - Dn).norm() / (tau * scale);
      D.swap(Dn);
      ++res.iterations;
      if (res.primal_residual < opts.tol) {
        res.converged = true;
        break;
      }
    }
    res.D = D;
  } else {
    // Chambolle-Pock over the dualized cone terms
    std::vector<int> deg(n, 0);
    for (const auto& c : dp.cones) {
      ++deg[c.i];
      ++deg[c.j];
    }
    const double L = std::sqrt(2.0 * *std::max_element(deg.begin(), deg.end()));
    const double step = 0.99 / L;

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, k);
    Eigen::MatrixXd Dbar = D, Dn(n, k), AtY(n, k);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), k);
    Eigen::MatrixXd Yn = Y;
    Eigen::RowVectorXd z(k);

    for (int t = 0; t < opts.max_iter; ++t) {
      // dual: y_m <- proj_{||.|| <= 2|alpha_m|}(y_m + step * A_m Dbar)
      for (std::size_t c = 0; c < m; ++c) {
        const auto& cone = dp.cones[c];
        z = Y.row(c) + step * (Dbar.row(cone.i) -
                               static_cast<double>(cone.sigma) *
                                   Dbar.row(cone.j));
        const double r = 2.0 * std::abs(cone.alpha);
        const double zn = z.norm();
        Yn.row(c) = zn > r ? (r / zn) * z : z;
      }
      // primal: D <- proj_feasible(D - step * (C + A^T y))
      AtY.setZero();
      for (std::size_t c = 0; c < m; ++c) {
        const auto& cone = dp.cones[c];
        AtY.row(cone.i) += Yn.row(c);
        AtY.row(cone.j) -= static_cast<double>(cone.sigma) * Yn.row(c);
      }
      Dn = D - step * (dp.C + AtY);
      detail::project_feasible(dp.F, Dn);

      // residuals of the optimality system
      double dres = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const auto& cone = dp.cones[c];
        dres += ((Y.row(c) - Yn.row(c)) / step -
                 ((D.row(cone.i) - Dn.row(cone.i)) -
                  static_cast<double>(cone.sigma) *
                      (D.row(cone.j) - Dn.row(cone.j))))
                    .squaredNorm();
      }
      Eigen::MatrixXd AtdY = Eigen::MatrixXd::Zero(n, k);
      for (std::size_t c = 0; c < m; ++c) {
        const auto& cone = dp.cones[c];
        AtdY.row(cone.i) += Y.row(c) - Yn.row(c);
        AtdY.row(cone.j) -=
            static_cast<double>(cone.sigma) * (Y.row(c) - Yn.row(c));
      }
      res.primal_residual = ((D - Dn) / step - AtdY).norm() / scale;
      res.dual_residual = std::sqrt(dres) / scale;

      Dbar = 2.0 * Dn - D;
      D.swap(Dn);
      Y.swap(Yn);
      ++res.iterations;
      if (res.primal_residual < opts.tol && res.dual_residual < opts.tol) {
        res.converged = true;
        break;
      }
    }
    res.D = D;
  }

  res.objective = surrogate_value(dp, res.D);
  if (res.objective > 0.0) {
    // 0 is feasible with value 0; never return an ascent direction
    res.D.setZero();
    res.objective = 0.0;
  }
  return res;
}

// True one-sided descent test at (F, D).
inline bool is_descent(const QuboInstance& inst, const FactorMatrix& F,
                       const Eigen::MatrixXd& D, double eps_boundary = 1e-7) {
  return directional_derivative(inst, F, D, eps_boundary) < 0.0;
}

// Compact human-readable dump of an assembled problem.
inline std::string describe(const DirectionProblem& dp) {
  std::size_t interior = 0, convex = 0, concave = 0;
  for (const auto& p : dp.pairs) {
    switch (p.cls) {
      case DirectionProblem::PairClass::Interior: ++interior; break;
      case DirectionProblem::PairClass::ConvexCone: ++convex; break;
      case DirectionProblem::PairClass::ConcaveLinearized: ++concave; break;
    }
  }
  std::ostringstream os;
  os << "direction problem: n=" << dp.n() << " k=" << dp.k()
     << " pairs=" << dp.pairs.size() << " (interior=" << interior
     << ", convex-cone=" << convex << ", concave-linearized=" << concave
     << ") ||C||_F=" << dp.C.norm();
  return os.str();
}

}  // namespace demqubo
