#include "aldual/problem.hpp"

#include <cmath>
#include <utility>

namespace aldual {

ParamDomain::ParamDomain(Eigen::Index dimension) : dimension_(dimension) {
  if (dimension <= 0) throw ProblemError("domain dimension must be positive");
}

ParamDomain::ParamDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : dimension_(lower.size()),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  if (dimension_ <= 0) throw ProblemError("domain dimension must be positive");
  if (lower_->size() != upper_->size())
    throw ProblemError("domain bounds have different lengths");
  if ((lower_->array() > upper_->array()).any())
    throw ProblemError("domain lower bound exceeds upper bound");
  if (!lower_->allFinite() || !upper_->allFinite())
    throw ProblemError("domain bounds must be finite");
}

bool ParamDomain::contains(const ParamVector& theta) const {
  if (theta.size() != dimension_) return false;
  if (!bounded()) return theta.allFinite();
  return (theta.array() >= lower_->array()).all() &&
         (theta.array() <= upper_->array()).all();
}

ParamVector ParamDomain::project(const ParamVector& theta) const {
  if (!bounded()) return theta;
  return theta.cwiseMax(*lower_).cwiseMin(*upper_);
}

RiskFunctional make_analytic_risk(std::string name, ScalarField value,
                                  GradientField gradient,
                                  std::optional<LossRange> range) {
  RiskFunctional r;
  r.name = std::move(name);
  r.kind = RiskKind::kAnalytic;
  r.value = std::move(value);
  r.gradient = std::move(gradient);
  r.range = range;
  return r;
}

RiskFunctional make_empirical_risk(std::string name, std::size_t sample_count,
                                   SampleLoss loss, SampleGradient gradient,
                                   std::optional<LossRange> range) {
  if (sample_count == 0) throw ProblemError("empirical risk over empty dataset");
  RiskFunctional r;
  r.name = std::move(name);
  r.kind = RiskKind::kEmpirical;
  r.sample_count = sample_count;
  r.range = range;
  r.value = [loss = std::move(loss), sample_count](const ParamVector& theta) {
    CompensatedSum sum;
    for (std::size_t n = 0; n < sample_count; ++n) sum.add(loss(theta, n));
    return sum.value() / static_cast<double>(sample_count);
  };
  if (gradient) {
    r.gradient = [gradient = std::move(gradient),
                  sample_count](const ParamVector& theta) {
      ParamVector total = gradient(theta, 0);
      for (std::size_t n = 1; n < sample_count; ++n) total += gradient(theta, n);
      return ParamVector(total / static_cast<double>(sample_count));
    };
  }
  return r;
}

const RiskFunctional& ConstrainedProblem::risk(std::size_t index) const {
  if (index == 0) return objective;
  if (index > constraints.size())
    throw ProblemError("risk index " + std::to_string(index) +
                       " out of range");
  return constraints[index - 1];
}

void ConstrainedProblem::validate() const {
  if (!objective.value) throw ProblemError("objective has no evaluator");
  for (const auto& c : constraints)
    if (!c.value) throw ProblemError("constraint '" + c.name + "' has no evaluator");
  if (objective.range && !std::isfinite(objective.range->lo))
    throw ProblemError("objective loss range has no finite lower bound");
}

namespace {

void check_dimension(const ConstrainedProblem& problem,
                     const ParamVector& theta) {
  if (theta.size() != problem.domain.dimension())
    throw ProblemError("parameter dimension " + std::to_string(theta.size()) +
                       " does not match domain dimension " +
                       std::to_string(problem.domain.dimension()));
}

double checked_value(const RiskFunctional& r, const ParamVector& theta) {
  const double v = r.value(theta);
  if (!std::isfinite(v))
    throw ProblemError("non-finite value of risk '" + r.name + "'");
  return v;
}

}  // namespace

Eigen::VectorXd evaluate_risks(const ConstrainedProblem& problem,
                               const ParamVector& theta) {
  check_dimension(problem, theta);
  Eigen::VectorXd out(problem.num_constraints() + 1);
  out(0) = checked_value(problem.objective, theta);
  for (std::size_t i = 0; i < problem.num_constraints(); ++i)
    out(static_cast<Eigen::Index>(i) + 1) =
        checked_value(problem.constraints[i], theta);
  return out;
}

Eigen::VectorXd evaluate_constraints(const ConstrainedProblem& problem,
                                     const ParamVector& theta) {
  check_dimension(problem, theta);
  Eigen::VectorXd out(problem.num_constraints());
  for (std::size_t i = 0; i < problem.num_constraints(); ++i)
    out(static_cast<Eigen::Index>(i)) =
        checked_value(problem.constraints[i], theta);
  return out;
}

ParamVector risk_gradient(const ConstrainedProblem& problem,
                          const ParamVector& theta, std::size_t index) {
  check_dimension(problem, theta);
  const RiskFunctional& r = problem.risk(index);
  if (!r.has_gradient())
    throw ProblemError("risk '" + r.name + "' provides no gradient");
  ParamVector g = r.gradient(theta);
  if (g.size() != theta.size())
    throw ProblemError("gradient of '" + r.name + "' has wrong dimension");
  return g;
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    compensation_ += (sum_ - t) + x;
  else
    compensation_ += (x - t) + sum_;
  sum_ = t;
}

ParamVector finite_difference_gradient(const ScalarField& f,
                                       const ParamVector& theta, double step) {
  ParamVector g(theta.size());
  ParamVector probe = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double h = step * std::max(1.0, std::abs(theta(j)));
    probe(j) = theta(j) + h;
    const double up = f(probe);
    probe(j) = theta(j) - h;
    const double down = f(probe);
    probe(j) = theta(j);
    g(j) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace aldual
