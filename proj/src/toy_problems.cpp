#include "aldual/toy_problems.hpp"

#include <cmath>

namespace aldual {

namespace {

ParamDomain interval(double lo, double hi) {
  return ParamDomain(Eigen::VectorXd::Constant(1, lo),
                     Eigen::VectorXd::Constant(1, hi));
}

ParamVector scalar(double v) { return ParamVector::Constant(1, v); }

}  // namespace

ConstrainedProblem make_toy_qp() {
  ConstrainedProblem p;
  p.objective = make_analytic_risk(
      "theta_squared", [](const ParamVector& t) { return t(0) * t(0); },
      [](const ParamVector& t) { return scalar(2.0 * t(0)); },
      LossRange{0.0, 9.0});
  p.constraints.push_back(make_analytic_risk(
      "one_minus_theta", [](const ParamVector& t) { return 1.0 - t(0); },
      [](const ParamVector&) { return scalar(-1.0); }));
  p.domain = interval(-3.0, 3.0);
  return p;
}

ConstrainedProblem make_nonconvex_1d() {
  ConstrainedProblem p;
  p.objective = make_analytic_risk(
      "sin3_plus_quarter_square",
      [](const ParamVector& t) {
        return std::sin(3.0 * t(0)) + 0.25 * t(0) * t(0);
      },
      [](const ParamVector& t) {
        return scalar(3.0 * std::cos(3.0 * t(0)) + 0.5 * t(0));
      },
      LossRange{-1.0, 3.25});
  p.constraints.push_back(make_analytic_risk(
      "cos_minus_half", [](const ParamVector& t) { return std::cos(t(0)) - 0.5; },
      [](const ParamVector& t) { return scalar(-std::sin(t(0))); }));
  p.domain = interval(-3.0, 3.0);
  return p;
}

ConstrainedProblem make_concave_1d() {
  ConstrainedProblem p;
  p.objective = make_analytic_risk(
      "negative_square", [](const ParamVector& t) { return -t(0) * t(0); },
      [](const ParamVector& t) { return scalar(-2.0 * t(0)); },
      LossRange{-1.0, 0.0});
  p.domain = interval(-1.0, 1.0);
  return p;
}

ConstrainedProblem builtin_problem(const std::string& id) {
  if (id == "toy-qp") return make_toy_qp();
  if (id == "nonconvex-1d") return make_nonconvex_1d();
  if (id == "concave-1d") return make_concave_1d();
  throw ProblemError("unknown builtin problem '" + id + "'");
}

std::vector<std::string> builtin_problem_ids() {
  return {"toy-qp", "nonconvex-1d", "concave-1d"};
}

}  // namespace aldual
