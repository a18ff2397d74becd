#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aldual/data.hpp"
#include "aldual/dual_ascent.hpp"
#include "aldual/mlp.hpp"
#include "aldual/problem.hpp"

namespace aldual {

/**
 * Single-attribute modification ρ of the protected block. A toggle flips one
 * binary indicator; a swap exchanges two categories of a one-hot group (the
 * reference level and one other), leaving rows in any third category as-is.
 * Both rules are involutions.
 */
struct FlipTransform {
  enum class Rule { kToggle, kSwap };

  std::string name;
  Rule rule = Rule::kToggle;
  /// Protected-block column (toggle) or the reference category column (swap).
  Eigen::Index column = 0;
  /// Swap partner column.
  Eigen::Index other = -1;

  /// Rows are samples.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& protected_block) const;

  static FlipTransform toggle(std::string name, Eigen::Index column);
  static FlipTransform swap(std::string name, Eigen::Index reference, Eigen::Index other);
  /// Identity, for tests and controls.
  static FlipTransform identity();

 private:
  bool is_identity_ = false;
};

/// One transform per binary protected column and per non-reference category.
std::vector<FlipTransform> default_flip_transforms(const TabularDataset& data);

/// Resolves "sex" (binary) or "race=Hispanic" (category vs reference) names.
FlipTransform flip_transform_by_name(const TabularDataset& data, const std::string& name);

struct FairnessConstraintSpec {
  std::vector<FlipTransform> transforms;
  double threshold = 0.01;
  double probability_floor = kDefaultProbabilityFloor;

  void validate() const;
};

/// (1/N) Σ −log clamp([f_θ(xₙ)]_{yₙ}); declared range [0, −log ε].
RiskFunctional cross_entropy_risk(const Mlp& model, const TabularDataset& data,
                                  double probability_floor = kDefaultProbabilityFloor);

/// (1/N) Σ D_KL(f_θ(x̃, z) ‖ f_θ(x̃, ρ(z))) − c; range [−c, −2 log ε − c].
RiskFunctional kl_fairness_risk(const Mlp& model, const TabularDataset& data,
                                const FlipTransform& rho, double threshold,
                                double probability_floor = kDefaultProbabilityFloor);

/// D_KL(p ‖ q) of two 2-class distributions with ε-clamped probabilities.
double clamped_kl(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                  double probability_floor = kDefaultProbabilityFloor);

/// Cross-entropy objective with one KL constraint per transform, Θ = ℝᵖ.
ConstrainedProblem make_fairness_problem(const Mlp& model, const TabularDataset& data,
                                         const FairnessConstraintSpec& spec);

/// Class 1 iff p₁ > p₀ (ties go to class 0).
Eigen::VectorXi predict(const Mlp& model, const ParamVector& theta,
                        const Eigen::MatrixXd& inputs);

double accuracy(const Mlp& model, const ParamVector& theta, const TabularDataset& data);

/// Fraction of samples whose predicted class changes under ρ.
double counterfactual_flip_rate(const Mlp& model, const ParamVector& theta,
                                const TabularDataset& data, const FlipTransform& rho);

/// Accuracy of the randomized predictor (one draw per sample).
double randomized_accuracy(const Mlp& model, RandomizedPredictor& predictor,
                           const TabularDataset& data);

/// Flip rate of the randomized predictor; the original and counterfactual
/// input of a sample are scored with the same draw.
double randomized_flip_rate(const Mlp& model, RandomizedPredictor& predictor,
                            const TabularDataset& data, const FlipTransform& rho);

}  // namespace aldual
