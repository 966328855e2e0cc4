#pragma once

// Row-normalized factor matrices F (n x k, every row on the unit sphere
// S^{k-1}).  The Gram matrix F F^T is the correlation surrogate all
// expectation/descent routines operate on.

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

#include "demqubo/rng.hpp"

namespace demqubo {

using FactorMatrix = Eigen::MatrixXd;

inline bool is_row_normalized(const FactorMatrix& F, double tol = 1e-10) {
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    if (std::abs(F.row(i).norm() - 1.0) > tol) return false;
  return true;
}

inline void check_factor(const FactorMatrix& F, Eigen::Index n) {
  if (F.rows() != n)
    throw std::invalid_argument("factor matrix has wrong number of rows");
  if (F.cols() < 1 || F.cols() > n)
    throw std::invalid_argument("factor rank must satisfy 1 <= k <= n");
  if (!is_row_normalized(F))
    throw std::invalid_argument("factor rows must be unit-norm within 1e-10");
}

// Retraction: rescale every row back to the sphere.
inline void normalize_rows(FactorMatrix& F) {
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    const double nrm = F.row(i).norm();
    if (!(nrm > 0.0))
      throw std::domain_error("normalize_rows: zero row cannot be retracted");
    F.row(i) /= nrm;
  }
}

// Rows i.i.d. standard normal, then normalized.
inline FactorMatrix random_factor(Eigen::Index n, Eigen::Index k,
                                  std::uint64_t seed) {
  if (k < 1 || k > n)
    throw std::invalid_argument("random_factor: need 1 <= k <= n");
  rng::NormalSampler normal(rng::substream(seed, 0));
  FactorMatrix F(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double nrm = 0.0;
    do {
      for (Eigen::Index c = 0; c < k; ++c) F(i, c) = normal();
      nrm = F.row(i).norm();
    } while (nrm < 1e-12);
    F.row(i) /= nrm;
  }
  return F;
}

}  // namespace demqubo
