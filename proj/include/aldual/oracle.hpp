#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "aldual/augmented_lagrangian.hpp"
#include "aldual/problem.hpp"

namespace aldual {

/// Uniform grid lo + j (hi − lo)/(points − 1), j = 0..points−1.
struct AxisGrid {
  double lo = 0.0;
  double hi = 1.0;
  int points = 2;

  double node(int j) const;
  Eigen::VectorXd nodes() const;
  void validate() const;
};

/// Brute-force grids: θ per coordinate, u per constraint, and the dual grid
/// (a λ axis shared by every multiplier times a base-10 logarithmic α axis).
struct GridSpec {
  std::vector<AxisGrid> theta;
  std::vector<AxisGrid> perturbation;
  AxisGrid lambda{0.0, 10.0, 201};
  AxisGrid log10_alpha{-2.0, 4.0, 61};

  void validate() const;
};

/// Sentinel for infeasible perturbations, p(u) = +∞.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

/// All θ grid nodes (columns) with their risks [ℓ₀; ℓ₁; …; ℓₘ] (columns).
struct ThetaTable {
  Eigen::MatrixXd points;
  Eigen::MatrixXd risks;
  /// Half the largest jump of ℓ₀ between axis-adjacent nodes.
  double resolution = 0.0;

  Eigen::Index size() const { return points.cols(); }
  Eigen::Index num_constraints() const { return risks.rows() - 1; }
};

/// Throws when the θ dimension exceeds 3 or the grid does not match it.
ThetaTable tabulate(const ConstrainedProblem& problem,
                    const std::vector<AxisGrid>& theta_grid);

struct PrimalOptimum {
  double value = 0.0;
  ParamVector argmin;
  double resolution = 0.0;
};

/// Grid minimum of ℓ₀ over nodes with ℓᵢ ≤ 0; throws if none is feasible.
PrimalOptimum brute_inf_P(const ThetaTable& table);
PrimalOptimum brute_inf_P(const ConstrainedProblem& problem, const GridSpec& grid);

/// Grid minimum of ℓ₀ subject to ℓᵢ ≤ uᵢ, or kInfeasible.
double perturbation_function(const ThetaTable& table, const Eigen::VectorXd& u);
double perturbation_function(const ConstrainedProblem& problem,
                             const Eigen::VectorXd& u, const GridSpec& grid);

struct PerturbationPoint {
  Eigen::VectorXd u;
  double p = kInfeasible;
};

/// p over the cartesian product of the perturbation axes.
std::vector<PerturbationPoint> perturbation_table(
    const ThetaTable& table, const std::vector<AxisGrid>& u_grid);

/// g(λ, α) = min over the θ grid of the augmented Lagrangian.
double dual_value(const ThetaTable& table, const DualState& dual);
/// g_std(λ) = min over the θ grid of the standard Lagrangian.
double standard_dual_value(const ThetaTable& table, const Eigen::VectorXd& lambda);

/// inf over v of p(v) + λv + αv² for a single constraint, exact against the
/// grid's step-function p. Used to cross-check dual_value.
double dual_value_via_perturbation(const ThetaTable& table, double lambda,
                                   double alpha);

struct DualSurface {
  /// Multiplier nodes, one per column (m × L).
  Eigen::MatrixXd lambdas;
  Eigen::VectorXd alphas;
  /// g(λ_l, α_a), L × A.
  Eigen::MatrixXd augmented;
  /// g_std(λ_l), length L.
  Eigen::VectorXd standard;
};

DualSurface dual_surface(const ThetaTable& table, const GridSpec& grid);

struct DualityReport {
  double inf_P = 0.0;
  ParamVector primal_argmin;
  double sup_D_augmented = 0.0;
  double sup_D_standard = 0.0;
  double gap_augmented = 0.0;
  double gap_standard = 0.0;
  Eigen::VectorXd lambda_bar;
  double alpha_bar = 0.0;
  Eigen::VectorXd lambda_bar_standard;
  double resolution = 0.0;
  /// Nodes breaking g ≤ inf_P + resolution, g_std ≤ g_aug, or α-monotonicity.
  int weak_duality_violations = 0;
  int dominance_violations = 0;
  int alpha_monotonicity_violations = 0;
};

/**
 * Runs the full brute-force duality comparison. The argmax dual pair is the
 * node with the smallest α (then smallest λ) among those attaining the
 * maximum within 1e-12.
 */
DualityReport duality_report(const ThetaTable& table, const DualSurface& surface);
DualityReport duality_report(const ConstrainedProblem& problem, const GridSpec& grid);

struct StabilityCheck {
  bool pass = false;
  double max_violation = 0.0;
  std::size_t points_checked = 0;
};

/**
 * Checks p(u) ≥ p(0) − ⟨λ̄, u⟩ − (ᾱ/2)‖u‖² over all finite table entries with
 * ‖u‖∞ ≤ radius. A violation is reported as the positive amount by which the
 * right-hand side exceeds p(u); the check passes when none exceeds `tol`.
 * Throws if u = 0 is missing from the table.
 */
StabilityCheck second_order_stability_check(
    const std::vector<PerturbationPoint>& table, const Eigen::VectorXd& lambda_bar,
    double alpha_bar, double radius, double tol = 0.0);

/// One-sided differences p(0) − p(u) for u > 0 along each axis (degree-0
/// stability diagnostic; not a pass/fail test).
std::vector<std::pair<double, double>> degree0_stability_profile(
    const std::vector<PerturbationPoint>& table);

struct LicqReport {
  bool independent = true;
  int rank = 0;
  std::vector<std::size_t> active;
};

LicqReport licq_check(const ConstrainedProblem& problem, const ParamVector& theta,
                      double active_tol = 1e-6);

struct SoscReport {
  bool pass = false;
  /// Dimension of the equality-reduced subspace the cone lives in.
  int cone_dimension = 0;
  double min_curvature = 0.0;
  int directions_checked = 0;
  Eigen::MatrixXd hessian;
};

/// Central-difference Hessian of a scalar field.
Eigen::MatrixXd finite_difference_hessian(const ScalarField& f,
                                          const ParamVector& theta,
                                          double step = 1e-4);

/**
 * Sampled second-order sufficiency check at a KKT pair: zᵀHz > tol over the
 * critical cone of H = ∇²L(θ̄, λ̄, 0), using an exact reduced-Hessian test
 * when no weakly active constraints exist and 512 quasi-random directions
 * otherwise.
 */
SoscReport sosc_check(const ConstrainedProblem& problem, const ParamVector& theta_bar,
                      const Eigen::VectorXd& lambda_bar, double tol = 1e-8,
                      double active_tol = 1e-6);

}  // namespace aldual
