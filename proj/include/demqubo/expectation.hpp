#pragma once

// The rounded-expectation objective Phi(F) = (2/pi) <Q, arcsin(F F^T)> over
// row-normalized factors, its Euclidean and Riemannian gradients, and the
// one-sided directional derivative including the arcsin boundary terms
// (|X_ij| = 1), where Phi is not differentiable but still directionally
// differentiable along retracted paths.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "demqubo/factor.hpp"
#include "demqubo/qubo.hpp"
#include "demqubo/rounding.hpp"

namespace demqubo {

inline double phi(const QuboInstance& inst, const FactorMatrix& F) {
  return expected_value(inst, F);
}

// d Phi / d F away from the boundary:
//   G = (4/pi) (Q ./ sqrt(1 - X.^2)) F,   X = F F^T,
// the 4 because Q_ij and Q_ji each contribute.  X is clipped to
// [-1 + eps_clip, 1 - eps_clip] so the weights stay finite; the spurious
// clipped-diagonal component is parallel to the rows and disappears under
// the tangent projection.
inline Eigen::MatrixXd euclidean_gradient(const QuboInstance& inst,
                                          const FactorMatrix& F,
                                          double eps_clip = 1e-6) {
  validate(inst);
  check_factor(F, inst.n());
  if (!(eps_clip > 0.0) || eps_clip >= 1.0)
    throw std::invalid_argument("euclidean_gradient: need 0 < eps_clip < 1");
  const Eigen::Index n = inst.n();
  Eigen::MatrixXd X(n, n);
  X.setZero();
  X.selfadjointView<Eigen::Lower>().rankUpdate(F);
  const double hi = 1.0 - eps_clip;
  Eigen::MatrixXd W(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double c = std::clamp(X(i, j), -hi, hi);
      const double w = inst.Q(i, j) / std::sqrt(1.0 - c * c);
      W(i, j) = w;
      W(j, i) = w;
    }
  }
  return (4.0 / std::numbers::pi) * (W * F);
}

// Removes from each row of G its component along the corresponding row of F
// (tangent projection on the product of spheres).
inline Eigen::MatrixXd riemannian_project(const FactorMatrix& F,
                                          const Eigen::MatrixXd& G) {
  if (G.rows() != F.rows() || G.cols() != F.cols())
    throw std::invalid_argument("riemannian_project: shape mismatch");
  Eigen::MatrixXd P = G;
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    P.row(i) -= F.row(i).dot(G.row(i)) * F.row(i);
  return P;
}

// One-sided derivative of t -> Phi(retract(F + t D)) at t = 0+, with D
// tangent (each d_i orthogonal to f_i).  Interior pairs contribute
//   (2/pi) (f_i.d_j + f_j.d_i) / sqrt(1 - X_ij^2);
// pairs at the boundary X_ij = sigma in {-1, +1} (within eps_boundary)
// contribute the conic term -(2/pi) sigma ||d_i - sigma d_j||.  Each
// unordered pair is counted twice (Q_ij and Q_ji).
inline double directional_derivative(const QuboInstance& inst,
                                     const FactorMatrix& F,
                                     const Eigen::MatrixXd& D,
                                     double eps_boundary = 1e-7) {
  validate(inst);
  check_factor(F, inst.n());
  if (D.rows() != F.rows() || D.cols() != F.cols())
    throw std::invalid_argument("directional_derivative: shape mismatch");
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    const double t = std::abs(F.row(i).dot(D.row(i)));
    if (t > 1e-8 * std::max(1.0, D.row(i).norm()))
      throw std::invalid_argument(
          "directional_derivative: D is not tangent at row " +
          std::to_string(i));
  }
  const Eigen::Index n = inst.n();
  const double c = 2.0 / std::numbers::pi;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double q = inst.Q(i, j);
      if (q == 0.0) continue;
      const double x = F.row(i).dot(F.row(j));
      double mu;
      if (std::abs(x) >= 1.0 - eps_boundary) {
        const double sigma = x > 0.0 ? 1.0 : -1.0;
        mu = -c * sigma * (D.row(i) - sigma * D.row(j)).norm();
      } else {
        mu = c * (F.row(i).dot(D.row(j)) + F.row(j).dot(D.row(i))) /
             std::sqrt(1.0 - x * x);
      }
      acc += 2.0 * q * mu;
    }
  }
  return acc;
}

}  // namespace demqubo
