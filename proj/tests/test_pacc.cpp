#include <doctest.h>

#include <cmath>

#include "aldual/pacc.hpp"

using namespace aldual;

TEST_CASE("bound arithmetic") {
  // Δλ = 2, Δα = 1, ζ̄ = 0.1, m = 1: (2 + 2)·0.1 + 1·1·0.01.
  const PaccBound b = pacc_bounds(Eigen::VectorXd::Constant(1, 2.0), 1.0,
                                  Eigen::VectorXd::Constant(1, 1.0), 1.0,
                                  Eigen::Vector2d(0.1, 0.05), 1, 0.05);
  CHECK(b.optimality_bound == doctest::Approx(0.41).epsilon(1e-15));
  CHECK(b.delta_lambda == 2.0);
  CHECK(b.delta_alpha == 1.0);
  CHECK(b.zeta_bar == 0.1);
  CHECK(b.feasibility_bounds(0) == 0.05);
  CHECK(b.total_confidence == doctest::Approx(0.85));
}

TEST_CASE("bound without constraints") {
  const PaccBound b = pacc_bounds(Eigen::VectorXd(), 0.0, Eigen::VectorXd(), 0.0,
                                  Eigen::VectorXd::Constant(1, 0.2), 0, 0.05);
  CHECK(b.optimality_bound == doctest::Approx(0.4));
  CHECK(b.total_confidence == doctest::Approx(0.95));
}

TEST_CASE("bound argument checks") {
  CHECK_THROWS_AS(pacc_bounds(Eigen::VectorXd::Zero(1), 1.0, Eigen::VectorXd::Zero(1), 1.0,
                              Eigen::VectorXd::Zero(1), 1),
                  ProblemError);
  CHECK_THROWS_AS(pacc_bounds(Eigen::VectorXd::Constant(1, -1.0), 1.0, Eigen::VectorXd::Zero(1),
                              1.0, Eigen::VectorXd::Zero(2), 1),
                  ProblemError);
}

TEST_CASE("Hoeffding radius") {
  CHECK(hoeffding_zeta(LossRange{0.0, 1.0}, 100, 0.05) ==
        doctest::Approx(0.13581015157406195).epsilon(1e-14));
  CHECK(hoeffding_zeta(LossRange{-1.0, 1.0}, 100, 0.05) ==
        doctest::Approx(2.0 * 0.13581015157406195).epsilon(1e-14));
  // Radius shrinks as 1/√N.
  CHECK(hoeffding_zeta(LossRange{0.0, 1.0}, 400, 0.05) ==
        doctest::Approx(0.5 * hoeffding_zeta(LossRange{0.0, 1.0}, 100, 0.05)));
  CHECK_THROWS_AS(hoeffding_zeta(LossRange{0.0, 1.0}, 0, 0.05), ProblemError);
  CHECK_THROWS_AS(hoeffding_zeta(LossRange{0.0, 1.0}, 10, 1.0), ProblemError);
  CHECK_THROWS_AS(hoeffding_zeta(LossRange{1.0, 0.0}, 10, 0.1), ProblemError);
}

TEST_CASE("regression family closed forms") {
  const RegressionFamily f;
  CHECK(f.optimizer()(0) == 1.0);
  CHECK(f.optimizer()(1) == doctest::Approx(std::sqrt(0.75)));
  CHECK(f.population_risks(f.optimizer())(1) == doctest::Approx(0.0).epsilon(1e-15));
  const double t = std::sqrt(0.75);
  CHECK(f.optimum() == doctest::Approx((1.5 - t) * (1.5 - t) / 3.0 + 0.25 / 3.0));
  CHECK(f.optimal_multiplier() == doctest::Approx((1.5 - t) / t));

  // Empirical risks and gradients agree with finite differences.
  std::mt19937_64 rng(1);
  const ConstrainedProblem p = f.empirical_problem(f.draw(200, rng));
  const ParamVector theta = Eigen::Vector2d(0.3, -0.4);
  for (std::size_t i = 0; i < 2; ++i) {
    const RiskFunctional& r = p.risk(i);
    const ParamVector fd = finite_difference_gradient(r.value, theta);
    CHECK((r.gradient(theta) - fd).norm() <= 1e-7);
  }
}

TEST_CASE("unconstrained family") {
  RegressionFamily f;
  f.constrained = false;
  CHECK(f.num_constraints() == 0);
  CHECK(f.optimal_multiplier() == 0.0);
  CHECK(f.optimum() == doctest::Approx(0.25 / 3.0));
}

TEST_CASE("harness validation") {
  HarnessConfig h;
  h.trials = 0;
  CHECK_THROWS_AS(h.validate(), ProblemError);
  h.trials = 1;
  h.sample_sizes.clear();
  CHECK_THROWS_AS(h.validate(), ProblemError);
}

TEST_CASE("small harness run is deterministic") {
  HarnessConfig h;
  h.sample_sizes = {50, 200};
  h.trials = 4;
  h.solver = HarnessConfig::default_solver();
  h.solver.outer_iters = 20;
  const HarnessReport a = empirical_pacc_harness(h);
  const HarnessReport b = empirical_pacc_harness(h);
  REQUIRE(a.rows.size() == 2);
  CHECK(a.monte_carlo_samples == 2000);
  CHECK(a.rows[0].abs_gaps == b.rows[0].abs_gaps);
  CHECK(a.rows[1].zeta(0) < a.rows[0].zeta(0));
  CHECK(a.monte_carlo_error < 0.05);
  CHECK(a.target_confidence == doctest::Approx(0.85));
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(std::isnan(median({})));
}
