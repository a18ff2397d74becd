#include "aldual/pacc.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace aldual {

PaccBound pacc_bounds(const Eigen::VectorXd& lambda_star, double alpha_star,
                      const Eigen::VectorXd& lambda_hat, double alpha_hat,
                      const Eigen::VectorXd& zetas, std::size_t m, double delta) {
  const auto mi = static_cast<Eigen::Index>(m);
  if (zetas.size() != mi + 1)
    throw ProblemError("expected " + std::to_string(m + 1) + " radii, got " +
                       std::to_string(zetas.size()));
  if (lambda_star.size() != mi || lambda_hat.size() != mi)
    throw ProblemError("multiplier vectors must have m entries");
  if ((lambda_star.array() < 0.0).any() || (lambda_hat.array() < 0.0).any())
    throw ProblemError("multipliers must be nonnegative");
  if (m > 0 && !(alpha_star > 0.0 && alpha_hat > 0.0))
    throw ProblemError("penalty levels must be positive");
  if ((zetas.array() < 0.0).any()) throw ProblemError("radii must be nonnegative");

  PaccBound b;
  b.delta = delta;
  b.zeta = zetas;
  b.zeta_bar = zetas.maxCoeff();
  b.num_constraints = m;
  b.delta_lambda = std::max(lambda_star.lpNorm<1>(), lambda_hat.lpNorm<1>());
  b.delta_alpha = m > 0 ? std::max(alpha_star, alpha_hat) : 0.0;
  b.optimality_bound = (2.0 + b.delta_lambda) * b.zeta_bar +
                       b.delta_alpha * static_cast<double>(m) * b.zeta_bar * b.zeta_bar;
  b.feasibility_bounds = zetas.tail(mi);
  b.total_confidence = 1.0 - static_cast<double>(2 * m + 1) * delta;
  return b;
}

RegressionFamily::Sample RegressionFamily::draw(std::size_t n, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Sample s;
  const auto cols = static_cast<Eigen::Index>(n);
  s.x.resize(2, cols);
  s.y.resize(cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    s.x(0, k) = unit(rng);
    s.x(1, k) = unit(rng);
    s.y(k) = beta.dot(s.x.col(k)) + noise * unit(rng);
  }
  return s;
}

LossRange RegressionFamily::objective_range() const {
  const double reach = beta.lpNorm<1>() + noise + 2.0 * box;
  return {0.0, reach * reach};
}

LossRange RegressionFamily::constraint_range() const { return {-budget, box * box - budget}; }

ConstrainedProblem RegressionFamily::empirical_problem(const Sample& sample) const {
  if (sample.y.size() == 0) throw ProblemError("empty sample");
  auto data = std::make_shared<const Sample>(sample);
  const auto n = static_cast<double>(sample.y.size());

  ConstrainedProblem p;
  p.objective.name = "squared_error";
  p.objective.kind = RiskKind::kEmpirical;
  p.objective.sample_count = static_cast<std::size_t>(sample.y.size());
  p.objective.range = objective_range();
  p.objective.value = [data, n](const ParamVector& theta) {
    const Eigen::VectorXd r = data->y - data->x.transpose() * theta;
    CompensatedSum sum;
    for (Eigen::Index k = 0; k < r.size(); ++k) sum.add(r(k) * r(k));
    return sum.value() / n;
  };
  p.objective.gradient = [data, n](const ParamVector& theta) {
    const Eigen::VectorXd r = data->y - data->x.transpose() * theta;
    return ParamVector(-2.0 / n * (data->x * r));
  };

  if (constrained) {
    RiskFunctional c;
    c.name = "second_coordinate_energy";
    c.kind = RiskKind::kEmpirical;
    c.sample_count = p.objective.sample_count;
    c.range = constraint_range();
    const double budget_c = budget;
    c.value = [data, n, budget_c](const ParamVector& theta) {
      CompensatedSum sum;
      for (Eigen::Index k = 0; k < data->x.cols(); ++k) {
        const double v = theta(1) * data->x(1, k);
        sum.add(v * v);
      }
      return sum.value() / n - budget_c;
    };
    c.gradient = [data, n](const ParamVector& theta) {
      ParamVector g = ParamVector::Zero(2);
      g(1) = 2.0 * theta(1) * data->x.row(1).squaredNorm() / n;
      return g;
    };
    p.constraints.push_back(std::move(c));
  }
  p.domain = ParamDomain(Eigen::Vector2d::Constant(-box), Eigen::Vector2d::Constant(box));
  return p;
}

Eigen::VectorXd RegressionFamily::population_risks(const ParamVector& theta) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(num_constraints()) + 1);
  out(0) = (beta - theta).squaredNorm() / 3.0 + noise * noise / 3.0;
  if (constrained) out(1) = theta(1) * theta(1) / 3.0 - budget;
  return out;
}

ParamVector RegressionFamily::optimizer() const {
  ParamVector theta = beta;
  if (constrained) {
    const double limit = std::sqrt(3.0 * budget);
    theta(1) = std::clamp(beta(1), -limit, limit);
  }
  return theta;
}

double RegressionFamily::optimum() const { return population_risks(optimizer())(0); }

double RegressionFamily::optimal_multiplier() const {
  if (!constrained) return 0.0;
  const double t = optimizer()(1);
  // Stationarity in θ₂: −2(β₂ − θ₂)/3 + λ·2θ₂/3 = 0.
  return t == 0.0 ? 0.0 : std::max(0.0, (beta(1) - t) / t);
}

AscentConfig HarnessConfig::default_solver() {
  AscentConfig c;
  c.growth_factor = 2.0;
  c.growth_interval = 5;
  c.outer_iters = 40;
  c.epsilon0 = 1e-4;
  c.epsilon_decay = 0.9;
  c.inner.method = InnerMethod::kGradientDescent;
  c.inner.line_search = true;
  c.inner.step_size = 0.5;
  c.inner.max_steps = 2000;
  c.inner.grad_tol = 1e-10;
  return c;
}

void HarnessConfig::validate() const {
  if (trials < 1) throw ProblemError("harness needs trials >= 1");
  if (sample_sizes.empty()) throw ProblemError("harness needs at least one sample size");
  for (std::size_t n : sample_sizes)
    if (n < 1) throw ProblemError("sample sizes must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ProblemError("delta must lie in (0, 1)");
  if (!(family.noise >= 0.0) || !(family.box > 0.0) || !(family.budget > 0.0))
    throw ProblemError("invalid regression family parameters");
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

AscentConfig solver_for(const HarnessConfig& config) {
  AscentConfig s = config.solver;
  const auto m = static_cast<Eigen::Index>(config.family.num_constraints());
  if (s.initial_dual.lambda.size() != m) s.initial_dual.lambda = Eigen::VectorXd::Zero(m);
  return s;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t size_index, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(size_index), static_cast<std::uint32_t>(trial)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

HarnessReport empirical_pacc_harness(const HarnessConfig& config) {
  config.validate();
  const RegressionFamily& family = config.family;
  const std::size_t m = family.num_constraints();
  const AscentConfig solver = solver_for(config);

  HarnessReport report;
  report.note =
      "zeta_i is the single-function Hoeffding radius, a heuristic stand-in for the "
      "uniform-convergence radius; coverage fractions are directional evidence only";
  report.delta = config.delta;
  report.target_confidence = 1.0 - static_cast<double>(2 * m + 1) * config.delta;
  report.num_constraints = m;

  // Population proxy: Monte Carlo set of 10x the largest N.
  const std::size_t largest =
      *std::max_element(config.sample_sizes.begin(), config.sample_sizes.end());
  report.monte_carlo_samples = 10 * largest;
  std::mt19937_64 mc_rng(trial_seed(config.seed, 1u << 20, 0));
  const ConstrainedProblem population =
      family.empirical_problem(family.draw(report.monte_carlo_samples, mc_rng));
  const SolveResult population_fit = solve_augmented(population, solver);
  report.population_optimum = evaluate_risks(population, population_fit.theta)(0);
  report.analytic_optimum = family.optimum();
  report.monte_carlo_error = std::abs(report.population_optimum - report.analytic_optimum);
  report.lambda_star = population_fit.dual.lambda;
  report.alpha_star = population_fit.dual.alpha;

  for (std::size_t si = 0; si < config.sample_sizes.size(); ++si) {
    const std::size_t n = config.sample_sizes[si];
    HarnessRow row;
    row.samples = n;
    row.trials = config.trials;
    row.zeta.resize(static_cast<Eigen::Index>(m) + 1);
    row.zeta(0) = hoeffding_zeta(family.objective_range(), n, config.delta);
    if (m > 0) row.zeta(1) = hoeffding_zeta(family.constraint_range(), n, config.delta);

    std::vector<double> deviations;
    std::vector<double> bounds;
    int feasible_within = 0;
    int within = 0;
    for (int t = 0; t < config.trials; ++t) {
      std::mt19937_64 rng(trial_seed(config.seed, si, t));
      try {
        const ConstrainedProblem problem = family.empirical_problem(family.draw(n, rng));
        const SolveResult fit = solve_augmented(problem, solver);
        if (fit.termination == Termination::kDiverged) {
          ++row.failures;
          continue;
        }
        const Eigen::VectorXd risks = evaluate_risks(population, fit.theta);
        const double gap = std::abs(report.population_optimum - risks(0));
        double violation = 0.0;
        double deviation = 0.0;
        bool feasible = true;
        for (std::size_t i = 1; i <= m; ++i) {
          const double l = risks(static_cast<Eigen::Index>(i));
          violation = std::max(violation, l);
          deviation = std::max(deviation, std::abs(l));
          feasible = feasible && l <= row.zeta(static_cast<Eigen::Index>(i));
        }
        const PaccBound bound = pacc_bounds(report.lambda_star, report.alpha_star,
                                            fit.dual.lambda, fit.dual.alpha, row.zeta, m,
                                            config.delta);
        row.abs_gaps.push_back(gap);
        row.max_violations.push_back(violation);
        deviations.push_back(deviation);
        bounds.push_back(bound.optimality_bound);
        if (feasible) ++feasible_within;
        if (feasible && gap <= bound.optimality_bound) ++within;
      } catch (const ProblemError&) {
        ++row.failures;
      }
    }
    const auto completed = static_cast<double>(row.abs_gaps.size());
    row.median_abs_gap = median(row.abs_gaps);
    row.median_max_violation = median(row.max_violations);
    row.median_constraint_deviation = median(deviations);
    row.median_optimality_bound = median(bounds);
    row.fraction_feasible_within_zeta = completed > 0 ? feasible_within / completed : 0.0;
    row.fraction_within_bounds = completed > 0 ? within / completed : 0.0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace aldual
