#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aldual/dual_ascent.hpp"
#include "aldual/problem.hpp"

namespace aldual {

/**
 * Single-function Hoeffding radius (hi − lo)·√(ln(2/δ) / (2N)).
 *
 * This is a plug-in for the uniform-convergence radius ζᵢ(N, δ): it holds for
 * one fixed θ, not uniformly over Θ, so bounds built on it are heuristic.
 */
template <typename Scalar>
Scalar hoeffding_zeta(const LossRange& range, std::size_t samples, Scalar delta) {
  if (!(range.hi >= range.lo)) throw ProblemError("loss range must satisfy hi >= lo");
  if (samples < 1) throw ProblemError("Hoeffding radius needs N >= 1");
  if (!(delta > Scalar(0) && delta < Scalar(1)))
    throw ProblemError("confidence delta must lie in (0, 1)");
  using std::log;
  using std::sqrt;
  return Scalar(range.width()) *
         sqrt(log(Scalar(2) / delta) / (Scalar(2) * Scalar(samples)));
}

struct PaccBound {
  double delta = 0.0;
  /// ζ₀..ζₘ.
  Eigen::VectorXd zeta;
  double zeta_bar = 0.0;
  double delta_lambda = 0.0;
  double delta_alpha = 0.0;
  std::size_t num_constraints = 0;
  /// (2 + Δλ) ζ̄ + Δα m ζ̄².
  double optimality_bound = 0.0;
  /// ζ₁..ζₘ.
  Eigen::VectorXd feasibility_bounds;
  /// 1 − (2m + 1) δ.
  double total_confidence = 0.0;
};

/// Assembles the PACC optimality and feasibility bounds. zetas has m + 1
/// entries; multiplier vectors have m.
PaccBound pacc_bounds(const Eigen::VectorXd& lambda_star, double alpha_star,
                      const Eigen::VectorXd& lambda_hat, double alpha_hat,
                      const Eigen::VectorXd& zetas, std::size_t m, double delta = 0.05);

/**
 * Synthetic family with a closed-form population optimum: x ~ U[−1, 1]²,
 * y = βᵀx + e with e ~ U[−σ, σ], Θ = [−b, b]²,
 *
 *   ℓ₀(θ) = E(y − θᵀx)² = ‖β − θ‖²/3 + σ²/3,
 *   ℓ₁(θ) = E(θ₂x₂)² − c = θ₂²/3 − c   (omitted when m = 0).
 */
struct RegressionFamily {
  Eigen::Vector2d beta{1.0, 1.5};
  double noise = 0.5;
  double budget = 0.25;
  double box = 2.0;
  bool constrained = true;

  std::size_t num_constraints() const { return constrained ? 1 : 0; }

  struct Sample {
    Eigen::MatrixXd x;  // 2 × N
    Eigen::VectorXd y;
  };
  Sample draw(std::size_t n, std::mt19937_64& rng) const;
  ConstrainedProblem empirical_problem(const Sample& sample) const;

  LossRange objective_range() const;
  LossRange constraint_range() const;

  Eigen::VectorXd population_risks(const ParamVector& theta) const;
  double optimum() const;
  ParamVector optimizer() const;
  double optimal_multiplier() const;
};

struct HarnessConfig {
  RegressionFamily family;
  std::vector<std::size_t> sample_sizes{250, 1000, 4000};
  int trials = 20;
  std::uint64_t seed = 7;
  double delta = 0.05;
  AscentConfig solver;

  void validate() const;
  static AscentConfig default_solver();
};

struct HarnessRow {
  std::size_t samples = 0;
  int trials = 0;
  int failures = 0;
  double median_abs_gap = 0.0;
  /// Median over trials of maxᵢ max{0, ℓᵢ(θ̂)}.
  double median_max_violation = 0.0;
  /// Median over trials of maxᵢ |ℓᵢ(θ̂)|.
  double median_constraint_deviation = 0.0;
  double median_optimality_bound = 0.0;
  Eigen::VectorXd zeta;
  /// Trials with ℓᵢ(θ̂) ≤ ζᵢ for every constraint.
  double fraction_feasible_within_zeta = 0.0;
  /// Trials meeting both the feasibility and the optimality bound.
  double fraction_within_bounds = 0.0;
  std::vector<double> abs_gaps;
  std::vector<double> max_violations;
};

struct HarnessReport {
  std::string note;
  double delta = 0.0;
  double target_confidence = 0.0;
  std::size_t num_constraints = 0;
  std::size_t monte_carlo_samples = 0;
  double population_optimum = 0.0;
  double analytic_optimum = 0.0;
  /// |MC optimum − analytic optimum|.
  double monte_carlo_error = 0.0;
  Eigen::VectorXd lambda_star;
  double alpha_star = 0.0;
  std::vector<HarnessRow> rows;
};

/// Per-N, per-trial estimation of |P* − ℓ₀(θ̂)| and population violations with
/// population risks taken on a Monte Carlo set of 10× the largest N.
HarnessReport empirical_pacc_harness(const HarnessConfig& config);

double median(std::vector<double> values);

}  // namespace aldual
