#include "aldual/dual_ascent.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace aldual {

void AscentConfig::validate(std::size_t num_constraints) const {
  if (!(growth_factor > 1.0)) throw ProblemError("growth_factor must exceed 1");
  if (growth_interval < 1) throw ProblemError("growth_interval must be >= 1");
  if (outer_iters < 1) throw ProblemError("outer_iters must be >= 1");
  if (!(epsilon0 > 0.0)) throw ProblemError("epsilon0 must be positive");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
    throw ProblemError("epsilon_decay must lie in (0, 1]");
  if (!(dual_step >= 0.0)) throw ProblemError("dual_step must be nonnegative");
  if (!(inner.step_size > 0.0)) throw ProblemError("inner step size must be positive");
  if (inner.max_steps < 1) throw ProblemError("inner max_steps must be >= 1");
  if (!(inner.grad_tol > 0.0)) throw ProblemError("inner grad_tol must be positive");
  if (inner.multistart_per_axis < 0)
    throw ProblemError("multistart_per_axis must be nonnegative");
  if (archive_every < 0) throw ProblemError("archive_every must be nonnegative");
  if (!(phr_damping > 0.0)) throw ProblemError("phr_damping must be positive");
  validate_dual(initial_dual, num_constraints);
  // The 1/α step of the shifted rule overshoots for α < 1.
  if (lambda_rule == LambdaRule::kShifted && initial_dual.alpha < 1.0)
    throw ProblemError("initial alpha must be >= 1 for the shifted multiplier rule");
}

double AscentConfig::epsilon(int k) const {
  return epsilon0 * std::pow(epsilon_decay, k);
}

namespace {

ParamVector projected_gradient(const ParamDomain& domain,
                               const ParamVector& theta,
                               const ParamVector& grad) {
  if (!domain.bounded()) return grad;
  return theta - domain.project(theta - grad);
}

}  // namespace

InnerResult minimize(const SmoothObjective& objective, const ParamDomain& domain,
                     const ParamVector& start, const InnerSolverConfig& config,
                     double tolerance) {
  const double stop = std::max(config.grad_tol, tolerance);
  InnerResult out;
  out.theta = domain.project(start);
  out.value = objective.value(out.theta);
  if (!std::isfinite(out.value))
    throw InnerSolveError("objective is non-finite at the inner start point");
  ParamVector grad = objective.gradient(out.theta);
  if (!grad.allFinite())
    throw InnerSolveError("gradient is non-finite at the inner start point");
  out.grad_norm = projected_gradient(domain, out.theta, grad).norm();

  const bool backtrack =
      config.method == InnerMethod::kGradientDescent && config.line_search;
  double step = config.step_size;
  ParamVector velocity = ParamVector::Zero(out.theta.size());

  while (out.steps < config.max_steps && out.grad_norm > stop) {
    ParamVector next;
    double next_value = 0.0;
    if (backtrack) {
      bool accepted = false;
      while (step > 1e-20) {
        next = domain.project(out.theta - step * grad);
        next_value = objective.value(next);
        const double decrease = grad.dot(out.theta - next);
        if (std::isfinite(next_value) &&
            next_value <= out.value - 1e-4 * decrease) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;  // stalled at machine precision
      step = std::min(2.0 * step, 1e8);
    } else {
      if (config.method == InnerMethod::kMomentum) {
        velocity = config.momentum * velocity - step * grad;
        next = domain.project(out.theta + velocity);
      } else {
        next = domain.project(out.theta - step * grad);
      }
      next_value = objective.value(next);
      if (!std::isfinite(next_value))
        throw InnerSolveError("inner objective diverged after " +
                              std::to_string(out.steps) + " steps");
    }
    out.theta = std::move(next);
    out.value = next_value;
    grad = objective.gradient(out.theta);
    if (!grad.allFinite())
      throw InnerSolveError("inner gradient diverged after " +
                            std::to_string(out.steps) + " steps");
    out.grad_norm = projected_gradient(domain, out.theta, grad).norm();
    ++out.steps;
  }
  return out;
}

namespace {

std::vector<ParamVector> lattice_starts(const ParamDomain& domain, int per_axis) {
  std::vector<ParamVector> starts;
  if (per_axis <= 0 || !domain.bounded()) return starts;
  const Eigen::Index dim = domain.dimension();
  double total = std::pow(static_cast<double>(per_axis), static_cast<double>(dim));
  if (total > 4096.0)
    throw ProblemError("multistart lattice too large for this dimension");
  std::vector<int> index(static_cast<std::size_t>(dim), 0);
  for (;;) {
    ParamVector p(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double lo = domain.lower()(j);
      const double hi = domain.upper()(j);
      p(j) = lo + (index[static_cast<std::size_t>(j)] + 0.5) * (hi - lo) / per_axis;
    }
    starts.push_back(std::move(p));
    Eigen::Index j = 0;
    while (j < dim && ++index[static_cast<std::size_t>(j)] == per_axis) {
      index[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == dim) break;
  }
  return starts;
}

InnerResult multistart_minimize(const SmoothObjective& objective,
                                const ParamDomain& domain,
                                const ParamVector& start,
                                const InnerSolverConfig& config,
                                double tolerance) {
  InnerResult best = minimize(objective, domain, start, config, tolerance);
  int total_steps = best.steps;
  for (const ParamVector& s : lattice_starts(domain, config.multistart_per_axis)) {
    InnerResult candidate = minimize(objective, domain, s, config, tolerance);
    total_steps += candidate.steps;
    if (candidate.value < best.value) best = std::move(candidate);
  }
  best.steps = total_steps;
  return best;
}

}  // namespace

InnerResult inner_solve(const ConstrainedProblem& problem,
                        const DualState& dual, const ParamVector& start,
                        const InnerSolverConfig& config, double epsilon_k) {
  validate_dual(dual, problem.num_constraints());
  SmoothObjective objective{
      [&](const ParamVector& t) {
        return augmented_lagrangian_from_risks(evaluate_risks(problem, t), dual);
      },
      [&](const ParamVector& t) {
        return augmented_lagrangian_grad_theta(problem, t, dual);
      }};
  return multistart_minimize(objective, problem.domain, start, config, epsilon_k);
}

InnerResult inner_solve_standard(const ConstrainedProblem& problem,
                                 const Eigen::VectorXd& lambda,
                                 const ParamVector& start,
                                 const InnerSolverConfig& config,
                                 double epsilon_k) {
  SmoothObjective objective{
      [&](const ParamVector& t) {
        return standard_lagrangian_from_risks(evaluate_risks(problem, t), lambda);
      },
      [&](const ParamVector& t) {
        return standard_lagrangian_grad_theta(problem, t, lambda);
      }};
  return multistart_minimize(objective, problem.domain, start, config, epsilon_k);
}

Eigen::VectorXd update_lambda(const Eigen::VectorXd& lambda, double alpha,
                              const Eigen::VectorXd& slacks, bool project) {
  if (lambda.size() != slacks.size())
    throw ProblemError("multiplier and slack vectors differ in length");
  if (!(alpha > 0.0)) throw ProblemError("alpha must be positive");
  Eigen::VectorXd next(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    // Both branches are admissible at equality; the first is the smooth one.
    if (slacks(i) >= -lambda(i) / (2.0 * alpha))
      next(i) = lambda(i) + slacks(i) / alpha;
    else
      next(i) = lambda(i) - 2.0 * lambda(i) / alpha;
  }
  if (project) next = next.cwiseMax(0.0);
  return next;
}

Eigen::VectorXd update_lambda_phr(const Eigen::VectorXd& lambda, double alpha,
                                  const Eigen::VectorXd& slacks,
                                  double damping) {
  if (lambda.size() != slacks.size())
    throw ProblemError("multiplier and slack vectors differ in length");
  return damping * (lambda + 2.0 * alpha * slacks).cwiseMax(0.0);
}

double update_alpha(double alpha, int k, const AscentConfig& config) {
  if (k > 0 && k % config.growth_interval == 0) return alpha * config.growth_factor;
  return alpha;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kConverged: return "converged";
    case Termination::kDiverged: return "diverged";
  }
  return "unknown";
}

namespace {

enum class Method { kAugmented, kStandard };

SolveResult run_dual_ascent(const ConstrainedProblem& problem,
                            const AscentConfig& config, Method method) {
  problem.validate();
  config.validate(problem.num_constraints());

  const ParamVector origin = config.initial_theta.size() == 0
                                 ? ParamVector::Zero(problem.domain.dimension())
                                 : config.initial_theta;
  if (origin.size() != problem.domain.dimension())
    throw ProblemError("initial_theta has wrong dimension");

  SolveResult result;
  result.theta = problem.domain.project(origin);
  result.dual = config.initial_dual;
  if (method == Method::kStandard) {
    result.dual.alpha = 0.0;
    if (config.project_lambda)
      result.dual.lambda = result.dual.lambda.cwiseMax(0.0);
  }
  DualState dual = result.dual;

  for (int k = 0; k < config.outer_iters; ++k) {
    const ParamVector& start = config.inner.warm_start ? result.theta : origin;
    InnerResult inner;
    Eigen::VectorXd risks;
    try {
      inner = method == Method::kAugmented
                  ? inner_solve(problem, dual, start, config.inner, config.epsilon(k))
                  : inner_solve_standard(problem, dual.lambda, start, config.inner,
                                         config.epsilon(k));
      risks = evaluate_risks(problem, inner.theta);
    } catch (const ProblemError& e) {
      result.termination = Termination::kDiverged;
      result.message = "outer iteration " + std::to_string(k) + ": " + e.what();
      return result;
    }

    TraceRecord rec;
    rec.iter = k;
    rec.lambda = dual.lambda;
    rec.alpha = dual.alpha;
    rec.slack = risks.tail(static_cast<Eigen::Index>(problem.num_constraints()));
    rec.objective = risks(0);
    rec.inner_steps = inner.steps;
    rec.inner_grad_norm = inner.grad_norm;
    rec.lagrangian = inner.value;
    result.trace.push_back(rec);
    result.theta = inner.theta;
    result.dual = dual;
    if (config.archive_every > 0 && k % config.archive_every == 0)
      result.archive.push_back({k, inner.theta});

    if (k + 1 == config.outer_iters) break;

    Eigen::VectorXd next_lambda;
    if (method == Method::kStandard) {
      next_lambda = dual.lambda + config.dual_step * rec.slack;
      if (config.project_lambda) next_lambda = next_lambda.cwiseMax(0.0);
    } else if (config.lambda_rule == LambdaRule::kShifted) {
      next_lambda = update_lambda(dual.lambda, dual.alpha, rec.slack,
                                  config.project_lambda);
    } else {
      next_lambda = update_lambda_phr(dual.lambda, dual.alpha, rec.slack,
                                      config.phr_damping);
    }
    if (!next_lambda.allFinite()) {
      result.termination = Termination::kDiverged;
      result.message = "non-finite multipliers after outer iteration " +
                       std::to_string(k);
      return result;
    }

    if (config.early_stop_tol) {
      const double max_slack =
          rec.slack.size() == 0 ? -std::numeric_limits<double>::infinity()
                                : rec.slack.maxCoeff();
      const double change = (next_lambda - dual.lambda).lpNorm<Eigen::Infinity>();
      if (max_slack <= *config.early_stop_tol && change <= *config.early_stop_tol) {
        result.termination = Termination::kConverged;
        break;
      }
    }

    dual.lambda = std::move(next_lambda);
    if (method == Method::kAugmented)
      dual.alpha = update_alpha(dual.alpha, k + 1, config);
  }
  return result;
}

}  // namespace

SolveResult solve_augmented(const ConstrainedProblem& problem,
                            const AscentConfig& config) {
  return run_dual_ascent(problem, config, Method::kAugmented);
}

SolveResult solve_standard(const ConstrainedProblem& problem,
                           const AscentConfig& config) {
  return run_dual_ascent(problem, config, Method::kStandard);
}

SolveResult solve_unconstrained(const ConstrainedProblem& problem,
                                const AscentConfig& config) {
  AscentConfig frozen = config;
  frozen.dual_step = 0.0;
  frozen.initial_dual.lambda =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.num_constraints()));
  frozen.early_stop_tol.reset();
  return run_dual_ascent(problem, frozen, Method::kStandard);
}

RandomizedPredictor::RandomizedPredictor(std::vector<ParamVector> archive,
                                         std::size_t t0, std::uint64_t seed)
    : archive_(std::move(archive)), t0_(t0), rng_(seed) {
  if (archive_.empty() || t0_ >= archive_.size())
    throw ProblemError("randomized predictor window is empty");
  pick_ = std::uniform_int_distribution<std::size_t>(t0_, archive_.size() - 1);
}

const ParamVector& RandomizedPredictor::draw() {
  last_ = pick_(rng_);
  return archive_[last_];
}

}  // namespace aldual
