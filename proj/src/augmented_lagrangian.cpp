#include "aldual/augmented_lagrangian.hpp"

#include <string>

namespace aldual {

void validate_dual(const DualState& dual, std::size_t num_constraints) {
  if (!(dual.alpha > 0.0) || !std::isfinite(dual.alpha))
    throw ProblemError("penalty level alpha must be positive and finite");
  if (static_cast<std::size_t>(dual.lambda.size()) != num_constraints)
    throw ProblemError("expected " + std::to_string(num_constraints) +
                       " multipliers, got " +
                       std::to_string(dual.lambda.size()));
  if (!dual.lambda.allFinite())
    throw ProblemError("multipliers must be finite");
}

double augmented_lagrangian(const ConstrainedProblem& problem,
                            const ParamVector& theta, const DualState& dual) {
  validate_dual(dual, problem.num_constraints());
  return augmented_lagrangian_from_risks(evaluate_risks(problem, theta), dual);
}

ParamVector augmented_lagrangian_grad_theta(const ConstrainedProblem& problem,
                                            const ParamVector& theta,
                                            const DualState& dual) {
  validate_dual(dual, problem.num_constraints());
  const Eigen::VectorXd slacks = evaluate_constraints(problem, theta);
  ParamVector grad = risk_gradient(problem, theta, 0);
  for (Eigen::Index i = 0; i < slacks.size(); ++i) {
    const double weight = scaled_psi_dx(slacks(i), dual.lambda(i), dual.alpha);
    if (weight > 0.0)
      grad += weight * risk_gradient(problem, theta,
                                     static_cast<std::size_t>(i) + 1);
  }
  return grad;
}

namespace {

void check_multipliers(const ConstrainedProblem& problem,
                       const Eigen::VectorXd& lambda) {
  if (static_cast<std::size_t>(lambda.size()) != problem.num_constraints())
    throw ProblemError("multiplier count does not match constraint count");
  if ((lambda.array() < 0.0).any())
    throw ProblemError("standard Lagrangian requires nonnegative multipliers");
}

}  // namespace

double standard_lagrangian(const ConstrainedProblem& problem,
                           const ParamVector& theta,
                           const Eigen::VectorXd& lambda) {
  check_multipliers(problem, lambda);
  return standard_lagrangian_from_risks(evaluate_risks(problem, theta), lambda);
}

ParamVector standard_lagrangian_grad_theta(const ConstrainedProblem& problem,
                                           const ParamVector& theta,
                                           const Eigen::VectorXd& lambda) {
  check_multipliers(problem, lambda);
  ParamVector grad = risk_gradient(problem, theta, 0);
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) != 0.0)
      grad += lambda(i) *
              risk_gradient(problem, theta, static_cast<std::size_t>(i) + 1);
  return grad;
}

}  // namespace aldual
