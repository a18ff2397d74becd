#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace aldual {

using ParamVector = Eigen::VectorXd;

/// Raised for violated preconditions and numerically invalid evaluations.
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed interval [lo, hi] of a sample-wise loss.
struct LossRange {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
};

/**
 * Parameter set Θ ⊆ ℝᵖ. Without bounds the domain is all of ℝᵖ; with bounds it
 * is the closed box [lower, upper].
 */
class ParamDomain {
 public:
  explicit ParamDomain(Eigen::Index dimension);
  ParamDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  Eigen::Index dimension() const { return dimension_; }
  bool bounded() const { return lower_.has_value(); }
  const Eigen::VectorXd& lower() const { return *lower_; }
  const Eigen::VectorXd& upper() const { return *upper_; }

  bool contains(const ParamVector& theta) const;
  ParamVector project(const ParamVector& theta) const;

 private:
  Eigen::Index dimension_;
  std::optional<Eigen::VectorXd> lower_;
  std::optional<Eigen::VectorXd> upper_;
};

enum class RiskKind { kAnalytic, kEmpirical };

using ScalarField = std::function<double(const ParamVector&)>;
using GradientField = std::function<ParamVector(const ParamVector&)>;

/**
 * A risk ℓᵢ(f_θ) seen as a scalar field over parameters, with an optional
 * gradient channel. Empirical risks close over their dataset and evaluate the
 * sample mean; `sample_count` records the dataset size N.
 */
struct RiskFunctional {
  std::string name;
  RiskKind kind = RiskKind::kAnalytic;
  ScalarField value;
  GradientField gradient;
  std::optional<LossRange> range;
  std::size_t sample_count = 0;

  bool has_gradient() const { return static_cast<bool>(gradient); }
};

RiskFunctional make_analytic_risk(std::string name, ScalarField value,
                                  GradientField gradient = {},
                                  std::optional<LossRange> range = {});

/// Sample-wise loss and its parameter gradient at sample index n.
using SampleLoss = std::function<double(const ParamVector&, std::size_t)>;
using SampleGradient =
    std::function<ParamVector(const ParamVector&, std::size_t)>;

/// Empirical risk (1/N) Σₙ ℓ̄(f_θ(xₙ), yₙ) over N samples.
RiskFunctional make_empirical_risk(std::string name, std::size_t sample_count,
                                   SampleLoss loss, SampleGradient gradient = {},
                                   std::optional<LossRange> range = {});

/// minimize ℓ₀ s.t. ℓᵢ ≤ 0, i = 1..m, over the domain.
struct ConstrainedProblem {
  RiskFunctional objective;
  std::vector<RiskFunctional> constraints;
  ParamDomain domain{1};

  std::size_t num_constraints() const { return constraints.size(); }
  const RiskFunctional& risk(std::size_t index) const;

  /// Throws if the objective declares a range without a finite lower bound.
  void validate() const;
};

/// [ℓ₀(θ), ℓ₁(θ), …, ℓₘ(θ)].
Eigen::VectorXd evaluate_risks(const ConstrainedProblem& problem,
                               const ParamVector& theta);

/// [ℓ₁(θ), …, ℓₘ(θ)].
Eigen::VectorXd evaluate_constraints(const ConstrainedProblem& problem,
                                     const ParamVector& theta);

ParamVector risk_gradient(const ConstrainedProblem& problem,
                          const ParamVector& theta, std::size_t index);

/// Neumaier-compensated running sum; order of `add` calls fixes the result.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Central-difference gradient, used by diagnostics and tests.
ParamVector finite_difference_gradient(const ScalarField& f,
                                       const ParamVector& theta,
                                       double step = 1e-5);

}  // namespace aldual
