// Direction subproblem: pair classification, the surrogate objective, the
// cone-free closed form, dominance of the returned direction over random
// feasible ones, and agreement with the true directional derivative where
// the surrogate is exact.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "demqubo/expectation.hpp"
#include "demqubo/factor.hpp"
#include "demqubo/qubo.hpp"
#include "demqubo/rng.hpp"
#include "demqubo/subproblem.hpp"

using namespace demqubo;

namespace {

Eigen::MatrixXd random_tangent(const FactorMatrix& F, std::uint64_t seed) {
  rng::NormalSampler normal(rng::substream(seed, 0));
  Eigen::MatrixXd D(F.rows(), F.cols());
  for (Eigen::Index i = 0; i < D.rows(); ++i)
    for (Eigen::Index j = 0; j < D.cols(); ++j) D(i, j) = normal();
  D = riemannian_project(F, D);
  return D / D.norm();
}

FactorMatrix interior_factor(Eigen::Index n, Eigen::Index k,
                             std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    const FactorMatrix F = random_factor(n, k, rng::derive_seed(seed, attempt));
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        worst = std::max(worst, std::abs(F.row(i).dot(F.row(j))));
    if (worst < 0.95) return F;
  }
}

double max_tangency_violation(const FactorMatrix& F, const Eigen::MatrixXd& D) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < F.rows(); ++i)
    worst = std::max(worst, std::abs(F.row(i).dot(D.row(i))));
  return worst;
}

// one coincident pair with negative coupling (a cone) plus interior pairs,
// so the solver has to balance the linear and conic parts
struct MixedProblem {
  QuboInstance inst;
  FactorMatrix F;
};

MixedProblem mixed_problem(std::uint64_t seed) {
  MixedProblem mp;
  const Eigen::Index n = 5;
  mp.F = interior_factor(n, 3, seed);
  mp.F.row(1) = mp.F.row(0);
  mp.inst.Q = Eigen::MatrixXd::Zero(n, n);
  mp.inst.Q(0, 1) = mp.inst.Q(1, 0) = -0.8;
  mp.inst.Q(0, 2) = mp.inst.Q(2, 0) = 1.5;
  mp.inst.Q(1, 3) = mp.inst.Q(3, 1) = -0.6;
  mp.inst.Q(2, 4) = mp.inst.Q(4, 2) = 2.0;
  mp.inst.Q(3, 4) = mp.inst.Q(4, 3) = 0.9;
  return mp;
}

}  // namespace

TEST_CASE("assemble classifies interior, convex and concave pairs") {
  QuboInstance inst;
  inst.Q = Eigen::MatrixXd::Zero(4, 4);
  inst.Q(0, 1) = inst.Q(1, 0) = -1.0;  // X = +1, sigma q < 0: convex cone
  inst.Q(0, 2) = inst.Q(2, 0) = 2.0;   // X = 0: interior
  inst.Q(0, 3) = inst.Q(3, 0) = -3.0;  // X = -1, sigma q > 0: concave
  inst.Q(1, 1) = 5.0;                  // diagonal never forms a pair
  FactorMatrix F(4, 2);
  F.row(0) << 1.0, 0.0;
  F.row(1) << 1.0, 0.0;
  F.row(2) << 0.0, 1.0;
  F.row(3) << -1.0, 0.0;

  const DirectionProblem dp = assemble(inst, F);
  REQUIRE(dp.pairs.size() == 3);
  REQUIRE(dp.cones.size() == 1);

  CHECK(dp.cones[0].i == 0);
  CHECK(dp.cones[0].j == 1);
  CHECK(dp.cones[0].sigma == 1);
  CHECK(dp.cones[0].alpha ==
        Catch::Approx(-2.0 / std::numbers::pi).margin(1e-15));

  int interior = 0, convex = 0, concave = 0;
  for (const auto& p : dp.pairs) {
    if (p.cls == DirectionProblem::PairClass::Interior) {
      ++interior;
      CHECK(p.i == 0);
      CHECK(p.j == 2);
      CHECK(p.sigma == 0);
    } else if (p.cls == DirectionProblem::PairClass::ConvexCone) {
      ++convex;
    } else {
      ++concave;
      CHECK(p.i == 0);
      CHECK(p.j == 3);
      CHECK(p.sigma == -1);
    }
  }
  CHECK(interior == 1);
  CHECK(convex == 1);
  CHECK(concave == 1);

  // interior pair (0,2) at X = 0: C.row(0) += 2 alpha f_2, C.row(2) += 2
  // alpha f_0; the concave pair linearized at nullptr contributes nothing
  const double w = 2.0 * (2.0 / std::numbers::pi) * 2.0;
  CHECK((dp.C.row(0) - w * F.row(2)).norm() < 1e-14);
  CHECK((dp.C.row(2) - w * F.row(0)).norm() < 1e-14);
  CHECK(dp.C.row(1).norm() == 0.0);
  CHECK(dp.C.row(3).norm() == 0.0);

  const std::string d = describe(dp);
  CHECK(d.find("interior=1") != std::string::npos);
  CHECK(d.find("convex-cone=1") != std::string::npos);
  CHECK(d.find("concave-linearized=1") != std::string::npos);
}

TEST_CASE("assemble linearizes concave pairs at the previous direction") {
  QuboInstance inst;
  inst.Q = Eigen::MatrixXd::Zero(2, 2);
  inst.Q(0, 1) = inst.Q(1, 0) = 1.0;  // X = +1, sigma q > 0: concave
  FactorMatrix F(2, 2);
  F.row(0) << 1.0, 0.0;
  F.row(1) << 1.0, 0.0;
  Eigen::MatrixXd D0(2, 2);
  D0.row(0) << 0.0, 1.0;
  D0.row(1) << 0.0, -1.0;

  const DirectionProblem dp = assemble(inst, F, &D0);
  REQUIRE(dp.pairs.size() == 1);
  CHECK(dp.pairs[0].cls == DirectionProblem::PairClass::ConcaveLinearized);
  CHECK(dp.cones.empty());

  // s = (d_0 - d_1)/||.|| = (0, 1); rows pick up -/+ 2|alpha| s
  const double w = 2.0 * (2.0 / std::numbers::pi);
  Eigen::RowVector2d s(0.0, 1.0);
  CHECK((dp.C.row(0) + w * s).norm() < 1e-14);
  CHECK((dp.C.row(1) - w * s).norm() < 1e-14);

  // at the linearization point the surrogate equals the true derivative
  const double truth = directional_derivative(inst, F, D0);
  CHECK(surrogate_value(dp, D0) == Catch::Approx(truth).margin(1e-12));

  // shape guards
  Eigen::MatrixXd bad(3, 2);
  CHECK_THROWS_AS(assemble(inst, F, &bad), std::invalid_argument);
  CHECK_THROWS_AS(surrogate_value(dp, bad), std::invalid_argument);
}

TEST_CASE("zero coupling solves to the zero direction") {
  QuboInstance inst;
  inst.Q = Eigen::MatrixXd::Zero(4, 4);
  inst.Q(2, 2) = 3.0;  // diagonal only
  const FactorMatrix F = random_factor(4, 3, 11);

  const DirectionProblem dp = assemble(inst, F);
  CHECK(dp.pairs.empty());
  CHECK(dp.C.norm() == 0.0);

  const SubproblemResult r = solve(dp);
  CHECK(r.converged);
  CHECK(r.D.norm() == 0.0);
  CHECK(r.objective == 0.0);
}

TEST_CASE("cone-free problems reach the projected-coefficient closed form") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::Index n = 6;
    const QuboInstance inst = gen_random_gaussian(n, 3000 + seed);
    const FactorMatrix F = interior_factor(n, 3, 3100 + seed);

    const DirectionProblem dp = assemble(inst, F);
    CHECK(dp.cones.empty());
    for (const auto& p : dp.pairs)
      CHECK(p.cls == DirectionProblem::PairClass::Interior);

    // linear objective over {tangent, ||D|| <= 1}: optimum is the negated
    // normalized tangent projection of C with value -||P(C)||_F
    const Eigen::MatrixXd PC = riemannian_project(F, dp.C);
    REQUIRE(PC.norm() > 1e-8);
    const Eigen::MatrixXd want = -PC / PC.norm();

    const SubproblemResult r = solve(dp);
    REQUIRE(r.converged);
    CHECK(r.objective == Catch::Approx(-PC.norm()).epsilon(1e-6));
    CHECK((r.D - want).norm() < 1e-5);

    // the surrogate is exact here, so the optimum is the steepest feasible
    // slope of Phi itself
    CHECK(surrogate_value(dp, r.D) ==
          Catch::Approx(directional_derivative(inst, F, r.D)).margin(1e-8));
  }
}

TEST_CASE("returned directions are feasible and dominate random ones") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const MixedProblem mp = mixed_problem(4000 + seed);
    const DirectionProblem dp = assemble(mp.inst, mp.F);
    REQUIRE(dp.cones.size() == 1);
    REQUIRE(dp.C.norm() > 0.0);

    const SubproblemResult r = solve(dp);
    REQUIRE(r.converged);
    CHECK(r.iterations > 1);
    CHECK(r.primal_residual < 1e-7);
    CHECK(r.dual_residual < 1e-7);
    CHECK(max_tangency_violation(mp.F, r.D) < 1e-8);
    CHECK(r.D.norm() <= 1.0 + 1e-8);
    CHECK(r.objective <= 0.0);

    for (std::uint64_t t = 0; t < 100; ++t) {
      const Eigen::MatrixXd Dr =
          random_tangent(mp.F, rng::derive_seed(5000 + seed, t));
      CHECK(r.objective <= surrogate_value(dp, Dr) + 1e-7);
    }
  }
}

TEST_CASE("surrogate upper-bounds the true derivative on boundary problems") {
  // concave pair (0,1), convex pair (2,3), interior pairs across the blocks
  QuboInstance inst;
  inst.Q = Eigen::MatrixXd::Zero(4, 4);
  inst.Q(0, 1) = inst.Q(1, 0) = 1.0;
  inst.Q(2, 3) = inst.Q(3, 2) = -1.0;
  inst.Q(0, 2) = inst.Q(2, 0) = 0.5;
  inst.Q(1, 3) = inst.Q(3, 1) = -0.7;
  FactorMatrix F(4, 2);
  F.row(0) << 1.0, 0.0;
  F.row(1) << 1.0, 0.0;
  F.row(2) << 0.0, 1.0;
  F.row(3) << 0.0, 1.0;

  const DirectionProblem dp = assemble(inst, F);
  REQUIRE(dp.cones.size() == 1);

  for (std::uint64_t t = 0; t < 50; ++t) {
    const Eigen::MatrixXd D = random_tangent(F, rng::derive_seed(6000, t));
    const double truth = directional_derivative(inst, F, D);
    CHECK(surrogate_value(dp, D) >= truth - 1e-8);
  }
}

TEST_CASE("cone-only stationary problems stop immediately at zero") {
  // C = 0 and a single nonnegative cone term: D = 0 is the optimum
  QuboInstance inst;
  inst.Q = Eigen::MatrixXd::Zero(2, 2);
  inst.Q(0, 1) = inst.Q(1, 0) = -1.0;
  FactorMatrix F(2, 2);
  F.row(0) << 1.0, 0.0;
  F.row(1) << 1.0, 0.0;

  const DirectionProblem dp = assemble(inst, F);
  CHECK(dp.C.norm() == 0.0);
  const SubproblemResult r = solve(dp);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.D.norm() == 0.0);
  CHECK(r.objective == 0.0);
}

TEST_CASE("iteration budget exhaustion reports non-convergence") {
  const MixedProblem mp = mixed_problem(7000);
  const DirectionProblem dp = assemble(mp.inst, mp.F);
  SolveOptions opts;
  opts.max_iter = 1;
  const SubproblemResult r = solve(dp, opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("descent test follows the sign of the directional derivative") {
  const QuboInstance inst = gen_random_gaussian(6, 77);
  const FactorMatrix F = interior_factor(6, 3, 78);
  const DirectionProblem dp = assemble(inst, F);
  const Eigen::MatrixXd PC = riemannian_project(F, dp.C);
  REQUIRE(PC.norm() > 1e-8);
  const Eigen::MatrixXd D = -PC / PC.norm();

  CHECK(is_descent(inst, F, D));
  CHECK_FALSE(is_descent(inst, F, Eigen::MatrixXd(-D)));
  CHECK_FALSE(is_descent(inst, F, Eigen::MatrixXd::Zero(6, 3)));
}
