#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aldual/augmented_lagrangian.hpp"
#include "aldual/problem.hpp"

namespace aldual {

class InnerSolveError : public ProblemError {
 public:
  using ProblemError::ProblemError;
};

enum class InnerMethod { kGradientDescent, kMomentum };

struct InnerSolverConfig {
  InnerMethod method = InnerMethod::kGradientDescent;
  double step_size = 0.1;
  int max_steps = 1000;
  /// Floor of the gradient-norm stop; the effective stop is max(this, εₖ).
  double grad_tol = 1e-9;
  bool warm_start = true;
  /// Armijo backtracking for gradient descent; momentum always uses fixed steps.
  bool line_search = true;
  double momentum = 0.9;
  /// Extra starts per axis on a uniform lattice of a bounded domain (0 = off).
  /// Keeps the εₖ-global argmin honest on low-dimensional nonconvex problems.
  int multistart_per_axis = 0;
};

enum class LambdaRule {
  /// λ + ℓ/α when ℓ ≥ −λ/(2α), else λ − 2λ/α.
  kShifted,
  /// damping · max{0, λ + 2αℓ}.
  kPhr,
};

struct AscentConfig {
  double growth_factor = 2.0;
  int growth_interval = 5;
  DualState initial_dual;
  /// Empty means the zero vector.
  ParamVector initial_theta;
  int outer_iters = 50;
  InnerSolverConfig inner;
  /// εₖ = epsilon0 · epsilon_decay^k.
  double epsilon0 = 1e-3;
  double epsilon_decay = 0.9;
  /// η of the standard projected ascent λ⁺ = max{0, λ + ηℓ}.
  double dual_step = 0.1;
  bool project_lambda = true;
  LambdaRule lambda_rule = LambdaRule::kShifted;
  double phr_damping = 1.0;
  /// Archive every j-th iterate (0 disables archiving).
  int archive_every = 0;
  /// Stop once max slack and the λ change are both below this.
  std::optional<double> early_stop_tol;

  void validate(std::size_t num_constraints) const;
  double epsilon(int k) const;
};

struct InnerResult {
  ParamVector theta;
  double value = 0.0;
  double grad_norm = 0.0;
  int steps = 0;
};

/// Smooth objective handed to the inner solver.
struct SmoothObjective {
  ScalarField value;
  GradientField gradient;
};

/**
 * Approximate minimization of a smooth objective over the domain by (projected)
 * gradient descent or heavy-ball momentum. Stops when the projected gradient
 * norm drops to max(config.grad_tol, tolerance) or after max_steps.
 *
 * Throws InnerSolveError when the objective turns non-finite.
 */
InnerResult minimize(const SmoothObjective& objective, const ParamDomain& domain,
                     const ParamVector& start, const InnerSolverConfig& config,
                     double tolerance);

/// εₖ-approximate argmin_θ L(θ, λ, α).
InnerResult inner_solve(const ConstrainedProblem& problem,
                        const DualState& dual, const ParamVector& start,
                        const InnerSolverConfig& config, double epsilon_k);

/// argmin_θ ℓ₀ + ⟨λ, ℓ(θ)⟩, same stopping rules.
InnerResult inner_solve_standard(const ConstrainedProblem& problem,
                                 const Eigen::VectorXd& lambda,
                                 const ParamVector& start,
                                 const InnerSolverConfig& config,
                                 double epsilon_k);

Eigen::VectorXd update_lambda(const Eigen::VectorXd& lambda, double alpha,
                              const Eigen::VectorXd& slacks, bool project);

Eigen::VectorXd update_lambda_phr(const Eigen::VectorXd& lambda, double alpha,
                                  const Eigen::VectorXd& slacks,
                                  double damping);

/// α·c when k > 0 and k ≡ 0 (mod I), otherwise α.
double update_alpha(double alpha, int k, const AscentConfig& config);

struct TraceRecord {
  int iter = 0;
  Eigen::VectorXd lambda;
  double alpha = 0.0;
  Eigen::VectorXd slack;
  double objective = 0.0;
  int inner_steps = 0;
  double inner_grad_norm = 0.0;
  double lagrangian = 0.0;
};

using TrainingTrace = std::vector<TraceRecord>;

struct ArchivedIterate {
  int iter = 0;
  ParamVector theta;
};

enum class Termination { kMaxIterations, kConverged, kDiverged };

std::string to_string(Termination t);

struct SolveResult {
  ParamVector theta;
  DualState dual;
  TrainingTrace trace;
  std::vector<ArchivedIterate> archive;
  Termination termination = Termination::kMaxIterations;
  std::string message;
};

/// Increased-shifted penalty method: θ-, λ- and α-updates for K outer steps.
SolveResult solve_augmented(const ConstrainedProblem& problem,
                            const AscentConfig& config);

/// Projected (non-augmented) dual ascent; trace has alpha = 0.
SolveResult solve_standard(const ConstrainedProblem& problem,
                           const AscentConfig& config);

/// solve_standard with frozen λ = 0: plain minimization of ℓ₀.
SolveResult solve_unconstrained(const ConstrainedProblem& problem,
                                const AscentConfig& config);

/// Draws archived iterates uniformly from the window [t0, T].
class RandomizedPredictor {
 public:
  RandomizedPredictor(std::vector<ParamVector> archive, std::size_t t0,
                      std::uint64_t seed);

  const ParamVector& draw();
  std::size_t window_size() const { return archive_.size() - t0_; }
  /// Index into the archive of the most recent draw.
  std::size_t last_index() const { return last_; }

 private:
  std::vector<ParamVector> archive_;
  std::size_t t0_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<std::size_t> pick_;
  std::size_t last_ = 0;
};

}  // namespace aldual
