#include <doctest.h>

#include <cmath>
#include <random>

#include "aldual/oracle.hpp"
#include "aldual/toy_problems.hpp"

using namespace aldual;

namespace {

// Reference values from an independent NumPy evaluation of the same grids.
constexpr double kNonconvexInfP = -0.415775597929648;
constexpr double kNonconvexResolution = 0.00211564107688844;
constexpr double kNonconvexSupStd = -0.709114020477685;

GridSpec grid_1d() {
  GridSpec g;
  g.theta = {AxisGrid{-3.0, 3.0, 6001}};
  g.perturbation = {AxisGrid{-0.5, 0.5, 101}};
  return g;
}

const ThetaTable& toy_table() {
  static const ThetaTable t = tabulate(make_toy_qp(), grid_1d().theta);
  return t;
}

const ThetaTable& nonconvex_table() {
  static const ThetaTable t = tabulate(make_nonconvex_1d(), grid_1d().theta);
  return t;
}

}  // namespace

TEST_CASE("axis grid nodes") {
  const AxisGrid a{-3.0, 3.0, 6001};
  CHECK(a.node(0) == -3.0);
  CHECK(a.node(6000) == 3.0);
  CHECK(a.node(4000) == 1.0);
  CHECK(a.nodes().size() == 6001);
  CHECK_THROWS_AS((AxisGrid{0.0, 1.0, 1}.validate()), ProblemError);
  CHECK_THROWS_AS((AxisGrid{1.0, 0.0, 5}.validate()), ProblemError);
}

TEST_CASE("tabulate rejects high dimensions and mismatched grids") {
  ConstrainedProblem p = make_toy_qp();
  CHECK_THROWS_AS(tabulate(p, {AxisGrid{0, 1, 3}, AxisGrid{0, 1, 3}}), ProblemError);
}

TEST_CASE("toy QP primal optimum") {
  const PrimalOptimum opt = brute_inf_P(toy_table());
  CHECK(opt.value == 1.0);
  CHECK(opt.argmin(0) == 1.0);
}

TEST_CASE("nonconvex primal optimum and resolution") {
  const PrimalOptimum opt = brute_inf_P(nonconvex_table());
  CHECK(opt.value == doctest::Approx(kNonconvexInfP).epsilon(1e-12));
  CHECK(opt.argmin(0) == doctest::Approx(1.487).epsilon(1e-12));
  CHECK(nonconvex_table().resolution == doctest::Approx(kNonconvexResolution).epsilon(1e-9));
}

TEST_CASE("infeasible grid throws") {
  ConstrainedProblem p = make_toy_qp();
  CHECK_THROWS_AS(brute_inf_P(tabulate(p, {AxisGrid{-3.0, 0.5, 101}})), ProblemError);
}

TEST_CASE("perturbation function of the toy QP") {
  // p(u) = (1 − u)² for u ≤ 1.
  for (double u : {-0.5, -0.1, 0.0, 0.25, 0.5}) {
    const double p = perturbation_function(toy_table(), Eigen::VectorXd::Constant(1, u));
    CHECK(p >= (1.0 - u) * (1.0 - u) - 1e-12);
    CHECK(p <= (1.0 - u) * (1.0 - u) + 3e-3);
  }
  CHECK(perturbation_function(toy_table(), Eigen::VectorXd::Constant(1, -10.0)) == kInfeasible);
}

TEST_CASE("toy QP dual at the KKT multiplier") {
  for (double alpha : {0.01, 1.0, 100.0, 1e4}) {
    CHECK(dual_value(toy_table(), {Eigen::VectorXd::Constant(1, 2.0), alpha}) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(standard_dual_value(toy_table(), Eigen::VectorXd::Constant(1, 2.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("small alpha row approximates the unconstrained minimum") {
  const double g = dual_value(nonconvex_table(), {Eigen::VectorXd::Zero(1), 1e-6});
  CHECK(g == doctest::Approx(-0.935070341779005).epsilon(1e-5));
}

TEST_CASE("dual value agrees with the perturbation envelope") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ls(0.0, 5.0), la(-2.0, 3.0);
  for (int n = 0; n < 50; ++n) {
    const double lambda = ls(rng), alpha = std::pow(10.0, la(rng));
    for (const ThetaTable* t : {&toy_table(), &nonconvex_table()}) {
      const double direct = dual_value(*t, {Eigen::VectorXd::Constant(1, lambda), alpha});
      const double envelope = dual_value_via_perturbation(*t, lambda, alpha);
      CHECK(direct == doctest::Approx(envelope).epsilon(1e-10));
    }
  }
}

TEST_CASE("duality report on the toy QP") {
  const DualityReport r = duality_report(make_toy_qp(), grid_1d());
  CHECK(r.inf_P == 1.0);
  CHECK(r.gap_augmented <= 1e-3);
  CHECK(r.weak_duality_violations == 0);
  CHECK(r.dominance_violations == 0);
  CHECK(r.alpha_monotonicity_violations == 0);
  // Ties at g = 1 resolve to the smallest α, then the smallest λ.
  CHECK(r.lambda_bar(0) == 2.0);
  CHECK(r.alpha_bar == doctest::Approx(0.01));
}

TEST_CASE("duality report on the nonconvex problem") {
  const DualityReport r = duality_report(make_nonconvex_1d(), grid_1d());
  CHECK(r.inf_P == doctest::Approx(kNonconvexInfP).epsilon(1e-12));
  CHECK(r.sup_D_standard == doctest::Approx(kNonconvexSupStd).epsilon(1e-10));
  CHECK(r.gap_augmented <= 10.0 * r.resolution);
  CHECK(r.gap_standard > 10.0 * r.resolution);
  CHECK(r.lambda_bar_standard(0) == doctest::Approx(0.65));
  CHECK(r.weak_duality_violations == 0);
  CHECK(r.dominance_violations == 0);
  CHECK(r.alpha_monotonicity_violations == 0);
}

TEST_CASE("second-order stability on the toy QP") {
  const auto table = perturbation_table(toy_table(), grid_1d().perturbation);
  SUBCASE("argmax pair") {
    const StabilityCheck c =
        second_order_stability_check(table, Eigen::VectorXd::Constant(1, 2.0), 2.0, 0.5);
    CHECK(c.pass);
    CHECK(c.max_violation == 0.0);
    CHECK(c.points_checked == 101);
  }
  SUBCASE("zero control fails") {
    const StabilityCheck c =
        second_order_stability_check(table, Eigen::VectorXd::Zero(1), 0.0, 0.5);
    CHECK_FALSE(c.pass);
    CHECK(c.max_violation == doctest::Approx(0.75).epsilon(1e-9));
  }
  SUBCASE("missing origin") {
    const auto shifted = perturbation_table(toy_table(), {AxisGrid{0.1, 0.5, 5}});
    CHECK_THROWS_AS(
        second_order_stability_check(shifted, Eigen::VectorXd::Zero(1), 0.0, 0.5), ProblemError);
  }
}

TEST_CASE("degree-0 profile is nonnegative for the toy QP") {
  const auto table = perturbation_table(toy_table(), grid_1d().perturbation);
  for (const auto& [u, drop] : degree0_stability_profile(table)) {
    CHECK(u > 0.0);
    CHECK(drop >= 0.0);
  }
}

TEST_CASE("LICQ and SOSC at the toy QP optimum") {
  const ConstrainedProblem p = make_toy_qp();
  const ParamVector theta = ParamVector::Constant(1, 1.0);
  const LicqReport licq = licq_check(p, theta);
  CHECK(licq.independent);
  CHECK(licq.rank == 1);
  REQUIRE(licq.active.size() == 1);
  // Strongly active constraint in 1-D leaves a zero-dimensional cone.
  const SoscReport sosc = sosc_check(p, theta, Eigen::VectorXd::Constant(1, 2.0));
  CHECK(sosc.pass);
  CHECK(sosc.cone_dimension == 0);
  CHECK(sosc.hessian(0, 0) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("LICQ fails for duplicated active constraints") {
  ConstrainedProblem p = make_toy_qp();
  p.constraints.push_back(p.constraints.front());
  const LicqReport licq = licq_check(p, ParamVector::Constant(1, 1.0));
  CHECK_FALSE(licq.independent);
  CHECK(licq.rank == 1);
}

TEST_CASE("SOSC fails at a stationary maximizer") {
  const ConstrainedProblem p = make_concave_1d();
  const SoscReport sosc = sosc_check(p, ParamVector::Zero(1), Eigen::VectorXd());
  CHECK_FALSE(sosc.pass);
  CHECK(sosc.min_curvature < 0.0);
}

TEST_CASE("SOSC on a 2-D problem with a weakly active constraint") {
  // min x² + y² s.t. −x ≤ 0; the constraint is weakly active at the origin.
  ConstrainedProblem p;
  p.objective = make_analytic_risk(
      "q", [](const ParamVector& t) { return t.squaredNorm(); },
      [](const ParamVector& t) { return ParamVector(2.0 * t); });
  p.constraints.push_back(make_analytic_risk(
      "c", [](const ParamVector& t) { return -t(0); },
      [](const ParamVector&) { return ParamVector(Eigen::Vector2d(-1.0, 0.0)); }));
  p.domain = ParamDomain(2);
  const SoscReport sosc = sosc_check(p, ParamVector::Zero(2), Eigen::VectorXd::Zero(1));
  CHECK(sosc.pass);
  CHECK(sosc.directions_checked > 0);
  CHECK(sosc.min_curvature == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("finite-difference Hessian") {
  const Eigen::MatrixXd h = finite_difference_hessian(
      [](const ParamVector& t) { return t(0) * t(0) * t(1) + 3.0 * t(1) * t(1); },
      Eigen::Vector2d(1.0, 2.0));
  CHECK(h(0, 0) == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(h(0, 1) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(h(1, 0) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(h(1, 1) == doctest::Approx(6.0).epsilon(1e-5));
}

TEST_CASE("grid validation") {
  GridSpec g = grid_1d();
  CHECK_NOTHROW(g.validate());
  g.lambda = AxisGrid{-1.0, 1.0, 3};
  CHECK_THROWS_AS(g.validate(), ProblemError);
}
