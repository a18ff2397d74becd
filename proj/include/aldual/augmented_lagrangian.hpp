#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "aldual/problem.hpp"

namespace aldual {

/**
 * Shifted quadratic penalty kernel
 *
 *   Ψ(x, y) = [max{0, 2x + y}² − y²] / 4.
 *
 * Ψ(x, y) ≤ 0 whenever x ≤ 0 and y ≥ 0, and Ψ is C¹ in x with a second
 * derivative jump on the line 2x + y = 0.
 */
template <typename Scalar>
Scalar psi(Scalar x, Scalar y) {
  const Scalar active = std::max(Scalar(0), Scalar(2) * x + y);
  return (active * active - y * y) / Scalar(4);
}

/**
 * α·Ψ(x, λ/α) evaluated in the multiplier scale,
 *
 *   (1/(4α)) [max{0, λ + 2αx}² − λ²],
 *
 * and simplified branchwise to λx + αx² (active) or −λ²/(4α) (inactive) so
 * no λ²/α² terms are formed for large α.
 */
template <typename Scalar>
Scalar scaled_psi(Scalar x, Scalar lambda, Scalar alpha) {
  if (lambda + Scalar(2) * alpha * x >= Scalar(0)) return x * (lambda + alpha * x);
  return -(lambda * lambda) / (Scalar(4) * alpha);
}

/// ∂/∂x of α·Ψ(x, λ/α), i.e. max{0, λ + 2αx}; zero on the inactive side.
template <typename Scalar>
Scalar scaled_psi_dx(Scalar x, Scalar lambda, Scalar alpha) {
  return std::max(Scalar(0), lambda + Scalar(2) * alpha * x);
}

/// Multipliers λ ∈ ℝᵐ and penalty level α > 0.
struct DualState {
  Eigen::VectorXd lambda;
  double alpha = 1.0;

  Eigen::Index size() const { return lambda.size(); }
};

/// Throws unless α > 0, all entries are finite and λ has m entries.
void validate_dual(const DualState& dual, std::size_t num_constraints);

/// ℓ₀ + α Σᵢ Ψ(ℓᵢ, λᵢ/α) from precomputed risks [ℓ₀, ℓ₁, …, ℓₘ].
template <typename Derived>
double augmented_lagrangian_from_risks(const Eigen::MatrixBase<Derived>& risks,
                                       const DualState& dual) {
  double value = risks(0);
  for (Eigen::Index i = 0; i < dual.size(); ++i)
    value += scaled_psi(risks(i + 1), dual.lambda(i), dual.alpha);
  return value;
}

/// ℓ₀ + Σᵢ λᵢ ℓᵢ from precomputed risks.
template <typename Derived>
double standard_lagrangian_from_risks(const Eigen::MatrixBase<Derived>& risks,
                                      const Eigen::VectorXd& lambda) {
  return risks(0) + lambda.dot(risks.tail(lambda.size()));
}

double augmented_lagrangian(const ConstrainedProblem& problem,
                            const ParamVector& theta, const DualState& dual);

/// ∇ℓ₀ + Σᵢ max{0, 2αℓᵢ + λᵢ} ∇ℓᵢ.
ParamVector augmented_lagrangian_grad_theta(const ConstrainedProblem& problem,
                                            const ParamVector& theta,
                                            const DualState& dual);

/// Throws on a negative multiplier.
double standard_lagrangian(const ConstrainedProblem& problem,
                           const ParamVector& theta,
                           const Eigen::VectorXd& lambda);

ParamVector standard_lagrangian_grad_theta(const ConstrainedProblem& problem,
                                           const ParamVector& theta,
                                           const Eigen::VectorXd& lambda);

}  // namespace aldual
