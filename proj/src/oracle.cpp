#include "aldual/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace aldual {

double AxisGrid::node(int j) const {
  if (j == points - 1) return hi;
  return lo + j * (hi - lo) / (points - 1);
}

Eigen::VectorXd AxisGrid::nodes() const {
  Eigen::VectorXd out(points);
  for (int j = 0; j < points; ++j) out(j) = node(j);
  return out;
}

void AxisGrid::validate() const {
  if (points < 2) throw ProblemError("grid axes need at least 2 points");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw ProblemError("grid axis needs a finite interval with lo < hi");
}

void GridSpec::validate() const {
  if (theta.empty()) throw ProblemError("theta grid is empty");
  for (const auto& a : theta) a.validate();
  for (const auto& a : perturbation) a.validate();
  lambda.validate();
  log10_alpha.validate();
  if (lambda.lo < 0.0) throw ProblemError("lambda grid must be nonnegative");
}

namespace {

// Mixed-radix counter over a list of axes, axis 0 fastest.
class LatticeCounter {
 public:
  explicit LatticeCounter(std::vector<int> sizes)
      : sizes_(std::move(sizes)), index_(sizes_.size(), 0) {}

  const std::vector<int>& index() const { return index_; }

  bool next() {
    for (std::size_t j = 0; j < sizes_.size(); ++j) {
      if (++index_[j] < sizes_[j]) return true;
      index_[j] = 0;
    }
    return false;
  }

 private:
  std::vector<int> sizes_;
  std::vector<int> index_;
};

std::vector<int> axis_sizes(const std::vector<AxisGrid>& axes) {
  std::vector<int> sizes;
  for (const auto& a : axes) sizes.push_back(a.points);
  return sizes;
}

double scale_of(double v) { return std::max(1.0, std::abs(v)); }

}  // namespace

ThetaTable tabulate(const ConstrainedProblem& problem,
                    const std::vector<AxisGrid>& theta_grid) {
  const Eigen::Index dim = problem.domain.dimension();
  if (dim > 3) throw ProblemError("brute-force oracle supports dimension <= 3");
  if (static_cast<Eigen::Index>(theta_grid.size()) != dim)
    throw ProblemError("theta grid has " + std::to_string(theta_grid.size()) +
                       " axes for a " + std::to_string(dim) + "-dim problem");
  for (const auto& a : theta_grid) a.validate();

  Eigen::Index total = 1;
  for (const auto& a : theta_grid) total *= a.points;

  ThetaTable table;
  table.points.resize(dim, total);
  table.risks.resize(static_cast<Eigen::Index>(problem.num_constraints()) + 1, total);

  LatticeCounter counter(axis_sizes(theta_grid));
  Eigen::Index col = 0;
  do {
    ParamVector theta(dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      theta(j) = theta_grid[static_cast<std::size_t>(j)].node(
          counter.index()[static_cast<std::size_t>(j)]);
    table.points.col(col) = theta;
    table.risks.col(col) = evaluate_risks(problem, theta);
    ++col;
  } while (counter.next());

  // Axis-adjacent jumps of ℓ₀.
  double max_jump = 0.0;
  Eigen::Index stride = 1;
  for (Eigen::Index j = 0; j < dim; ++j) {
    const int n = theta_grid[static_cast<std::size_t>(j)].points;
    for (Eigen::Index c = 0; c < total; ++c) {
      if ((c / stride) % n == n - 1) continue;
      max_jump = std::max(max_jump,
                          std::abs(table.risks(0, c + stride) - table.risks(0, c)));
    }
    stride *= n;
  }
  table.resolution = 0.5 * max_jump;
  return table;
}

PrimalOptimum brute_inf_P(const ThetaTable& table) {
  PrimalOptimum best;
  best.value = kInfeasible;
  best.resolution = table.resolution;
  Eigen::Index arg = -1;
  for (Eigen::Index c = 0; c < table.size(); ++c) {
    if (table.num_constraints() > 0 &&
        table.risks.col(c).tail(table.num_constraints()).maxCoeff() > 0.0)
      continue;
    if (table.risks(0, c) < best.value) {
      best.value = table.risks(0, c);
      arg = c;
    }
  }
  if (arg < 0) throw ProblemError("no feasible point on the theta grid");
  best.argmin = table.points.col(arg);
  return best;
}

PrimalOptimum brute_inf_P(const ConstrainedProblem& problem, const GridSpec& grid) {
  grid.validate();
  return brute_inf_P(tabulate(problem, grid.theta));
}

double perturbation_function(const ThetaTable& table, const Eigen::VectorXd& u) {
  if (u.size() != table.num_constraints())
    throw ProblemError("perturbation has wrong length");
  double best = kInfeasible;
  for (Eigen::Index c = 0; c < table.size(); ++c) {
    bool feasible = true;
    for (Eigen::Index i = 0; i < u.size() && feasible; ++i)
      feasible = table.risks(i + 1, c) <= u(i);
    if (feasible) best = std::min(best, table.risks(0, c));
  }
  return best;
}

double perturbation_function(const ConstrainedProblem& problem,
                             const Eigen::VectorXd& u, const GridSpec& grid) {
  grid.validate();
  return perturbation_function(tabulate(problem, grid.theta), u);
}

std::vector<PerturbationPoint> perturbation_table(
    const ThetaTable& table, const std::vector<AxisGrid>& u_grid) {
  if (static_cast<Eigen::Index>(u_grid.size()) != table.num_constraints())
    throw ProblemError("perturbation grid needs one axis per constraint");
  std::vector<PerturbationPoint> out;
  if (u_grid.empty()) {
    out.push_back({Eigen::VectorXd(0), perturbation_function(table, Eigen::VectorXd(0))});
    return out;
  }
  for (const auto& a : u_grid) a.validate();
  LatticeCounter counter(axis_sizes(u_grid));
  do {
    Eigen::VectorXd u(static_cast<Eigen::Index>(u_grid.size()));
    for (std::size_t i = 0; i < u_grid.size(); ++i)
      u(static_cast<Eigen::Index>(i)) = u_grid[i].node(counter.index()[i]);
    out.push_back({u, perturbation_function(table, u)});
  } while (counter.next());
  return out;
}

double dual_value(const ThetaTable& table, const DualState& dual) {
  if (dual.lambda.size() != table.num_constraints())
    throw ProblemError("multiplier count does not match the table");
  double best = kInfeasible;
  for (Eigen::Index c = 0; c < table.size(); ++c)
    best = std::min(best, augmented_lagrangian_from_risks(table.risks.col(c), dual));
  return best;
}

double standard_dual_value(const ThetaTable& table, const Eigen::VectorXd& lambda) {
  if (lambda.size() != table.num_constraints())
    throw ProblemError("multiplier count does not match the table");
  double best = kInfeasible;
  for (Eigen::Index c = 0; c < table.size(); ++c)
    best = std::min(best, standard_lagrangian_from_risks(table.risks.col(c), lambda));
  return best;
}

double dual_value_via_perturbation(const ThetaTable& table, double lambda,
                                   double alpha) {
  if (table.num_constraints() != 1)
    throw ProblemError("perturbation form of the dual needs exactly one constraint");
  if (!(alpha > 0.0)) throw ProblemError("alpha must be positive");

  // p is a nonincreasing step function jumping only at image values of ℓ₁;
  // on each step the quadratic λv + αv² is minimized at an endpoint or at
  // its vertex −λ/(2α).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(table.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return table.risks(1, a) < table.risks(1, b);
  });
  std::vector<double> image(order.size());
  std::vector<double> prefix_min(order.size());
  double running = kInfeasible;
  for (std::size_t j = 0; j < order.size(); ++j) {
    image[j] = table.risks(1, order[j]);
    running = std::min(running, table.risks(0, order[j]));
    prefix_min[j] = running;
  }
  const auto p_at = [&](double v) {
    const auto it = std::upper_bound(image.begin(), image.end(), v);
    if (it == image.begin()) return kInfeasible;
    return prefix_min[static_cast<std::size_t>(it - image.begin()) - 1];
  };
  const auto q = [&](double v) { return lambda * v + alpha * v * v; };

  double best = kInfeasible;
  for (std::size_t j = 0; j < image.size(); ++j)
    best = std::min(best, p_at(image[j]) + q(image[j]));
  const double vertex = -lambda / (2.0 * alpha);
  const double pv = p_at(vertex);
  if (pv < kInfeasible) best = std::min(best, pv + q(vertex));
  return best;
}

DualSurface dual_surface(const ThetaTable& table, const GridSpec& grid) {
  grid.validate();
  const Eigen::Index m = table.num_constraints();
  DualSurface s;

  const Eigen::VectorXd log_alpha = grid.log10_alpha.nodes();
  s.alphas = log_alpha.unaryExpr([](double e) { return std::pow(10.0, e); });

  const Eigen::VectorXd lambda_axis = grid.lambda.nodes();
  Eigen::Index count = 1;
  for (Eigen::Index i = 0; i < m; ++i) count *= lambda_axis.size();
  s.lambdas.resize(m, count);
  if (m > 0) {
    LatticeCounter counter(std::vector<int>(static_cast<std::size_t>(m),
                                            static_cast<int>(lambda_axis.size())));
    Eigen::Index col = 0;
    do {
      for (Eigen::Index i = 0; i < m; ++i)
        s.lambdas(i, col) = lambda_axis(counter.index()[static_cast<std::size_t>(i)]);
      ++col;
    } while (counter.next());
  }

  s.augmented.resize(count, s.alphas.size());
  s.standard.resize(count);
  for (Eigen::Index l = 0; l < count; ++l) {
    const Eigen::VectorXd lambda = s.lambdas.col(l);
    s.standard(l) = standard_dual_value(table, lambda);
    for (Eigen::Index a = 0; a < s.alphas.size(); ++a)
      s.augmented(l, a) = dual_value(table, DualState{lambda, s.alphas(a)});
  }
  return s;
}

DualityReport duality_report(const ThetaTable& table, const DualSurface& surface) {
  DualityReport r;
  const PrimalOptimum primal = brute_inf_P(table);
  r.inf_P = primal.value;
  r.primal_argmin = primal.argmin;
  r.resolution = primal.resolution;

  r.sup_D_augmented = surface.augmented.maxCoeff();
  Eigen::Index best_std = 0;
  r.sup_D_standard = surface.standard.maxCoeff(&best_std);
  r.lambda_bar_standard = surface.lambdas.col(best_std);

  // Smallest α, then smallest λ (lattice order), attaining the maximum.
  const double cutoff = r.sup_D_augmented - 1e-12 * scale_of(r.sup_D_augmented);
  bool found = false;
  for (Eigen::Index a = 0; a < surface.alphas.size() && !found; ++a)
    for (Eigen::Index l = 0; l < surface.lambdas.cols() && !found; ++l)
      if (surface.augmented(l, a) >= cutoff) {
        r.lambda_bar = surface.lambdas.col(l);
        r.alpha_bar = surface.alphas(a);
        found = true;
      }

  r.gap_augmented = r.inf_P - r.sup_D_augmented;
  r.gap_standard = r.inf_P - r.sup_D_standard;

  const double ceiling = r.inf_P + r.resolution;
  for (Eigen::Index l = 0; l < surface.lambdas.cols(); ++l) {
    if (surface.standard(l) > ceiling) ++r.weak_duality_violations;
    for (Eigen::Index a = 0; a < surface.alphas.size(); ++a) {
      const double g = surface.augmented(l, a);
      if (g > ceiling) ++r.weak_duality_violations;
      if (surface.standard(l) > g + 1e-12 * scale_of(g)) ++r.dominance_violations;
      if (a > 0 && g < surface.augmented(l, a - 1) - 1e-12 * scale_of(g))
        ++r.alpha_monotonicity_violations;
    }
  }
  return r;
}

DualityReport duality_report(const ConstrainedProblem& problem, const GridSpec& grid) {
  grid.validate();
  const ThetaTable table = tabulate(problem, grid.theta);
  return duality_report(table, dual_surface(table, grid));
}

StabilityCheck second_order_stability_check(
    const std::vector<PerturbationPoint>& table, const Eigen::VectorXd& lambda_bar,
    double alpha_bar, double radius, double tol) {
  const PerturbationPoint* origin = nullptr;
  for (const auto& pt : table)
    if (pt.u.size() == lambda_bar.size() && (pt.u.array() == 0.0).all()) origin = &pt;
  if (origin == nullptr) throw ProblemError("perturbation table lacks u = 0");
  if (!std::isfinite(origin->p)) throw ProblemError("p(0) is infeasible");

  StabilityCheck out;
  for (const auto& pt : table) {
    if (!std::isfinite(pt.p) || pt.u.size() != lambda_bar.size()) continue;
    if (pt.u.size() > 0 && pt.u.lpNorm<Eigen::Infinity>() > radius) continue;
    const double bound =
        origin->p - lambda_bar.dot(pt.u) - 0.5 * alpha_bar * pt.u.squaredNorm();
    out.max_violation = std::max(out.max_violation, bound - pt.p);
    ++out.points_checked;
  }
  out.pass = out.max_violation <= tol;
  return out;
}

std::vector<std::pair<double, double>> degree0_stability_profile(
    const std::vector<PerturbationPoint>& table) {
  double p0 = kInfeasible;
  for (const auto& pt : table)
    if ((pt.u.array() == 0.0).all()) p0 = pt.p;
  std::vector<std::pair<double, double>> out;
  for (const auto& pt : table) {
    if (pt.u.size() == 0 || (pt.u.array() < 0.0).any() || pt.u.isZero(0.0)) continue;
    if (pt.u.size() > 1 && (pt.u.array() > 0.0).count() != 1) continue;
    out.emplace_back(pt.u.maxCoeff(), p0 - pt.p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

LicqReport licq_check(const ConstrainedProblem& problem, const ParamVector& theta,
                      double active_tol) {
  LicqReport report;
  const Eigen::VectorXd slacks = evaluate_constraints(problem, theta);
  for (Eigen::Index i = 0; i < slacks.size(); ++i)
    if (std::abs(slacks(i)) <= active_tol)
      report.active.push_back(static_cast<std::size_t>(i) + 1);
  if (report.active.empty()) return report;

  Eigen::MatrixXd grads(theta.size(), static_cast<Eigen::Index>(report.active.size()));
  for (std::size_t k = 0; k < report.active.size(); ++k)
    grads.col(static_cast<Eigen::Index>(k)) = risk_gradient(problem, theta, report.active[k]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(grads);
  qr.setThreshold(1e-8);
  report.rank = static_cast<int>(qr.rank());
  report.independent = report.rank == static_cast<int>(report.active.size());
  return report;
}

Eigen::MatrixXd finite_difference_hessian(const ScalarField& f,
                                          const ParamVector& theta, double step) {
  const Eigen::Index n = theta.size();
  Eigen::MatrixXd h(n, n);
  ParamVector probe = theta;
  const double center = f(theta);
  for (Eigen::Index i = 0; i < n; ++i) {
    probe(i) = theta(i) + step;
    const double up = f(probe);
    probe(i) = theta(i) - step;
    const double down = f(probe);
    probe(i) = theta(i);
    h(i, i) = (up - 2.0 * center + down) / (step * step);
    for (Eigen::Index j = 0; j < i; ++j) {
      auto at = [&](double si, double sj) {
        probe(i) = theta(i) + si * step;
        probe(j) = theta(j) + sj * step;
        const double v = f(probe);
        probe(i) = theta(i);
        probe(j) = theta(j);
        return v;
      };
      h(i, j) = h(j, i) =
          (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * step * step);
    }
  }
  return h;
}

namespace {

double radical_inverse(int index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

SoscReport sosc_check(const ConstrainedProblem& problem, const ParamVector& theta_bar,
                      const Eigen::VectorXd& lambda_bar, double tol,
                      double active_tol) {
  if (problem.domain.dimension() > 3)
    throw ProblemError("SOSC diagnostic supports dimension <= 3");
  if (static_cast<std::size_t>(lambda_bar.size()) != problem.num_constraints())
    throw ProblemError("multiplier count does not match constraint count");

  SoscReport report;
  const ScalarField lagrangian = [&](const ParamVector& t) {
    return standard_lagrangian_from_risks(evaluate_risks(problem, t), lambda_bar);
  };
  report.hessian = finite_difference_hessian(lagrangian, theta_bar);
  if (!report.hessian.allFinite()) throw ProblemError("Hessian is non-finite");

  const Eigen::VectorXd slacks = evaluate_constraints(problem, theta_bar);
  std::vector<ParamVector> strong;
  std::vector<ParamVector> weak;
  for (Eigen::Index i = 0; i < slacks.size(); ++i) {
    if (std::abs(slacks(i)) > active_tol) continue;
    ParamVector g = risk_gradient(problem, theta_bar, static_cast<std::size_t>(i) + 1);
    (lambda_bar(i) > 0.0 ? strong : weak).push_back(std::move(g));
  }

  const Eigen::Index n = theta_bar.size();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);
  if (!strong.empty()) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(strong.size()), n);
    for (std::size_t k = 0; k < strong.size(); ++k)
      rows.row(static_cast<Eigen::Index>(k)) = strong[k].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
    svd.setThreshold(1e-8);
    const Eigen::Index rank = svd.rank();
    basis = svd.matrixV().rightCols(n - rank);
  }
  report.cone_dimension = static_cast<int>(basis.cols());
  if (basis.cols() == 0) {
    report.pass = true;
    report.min_curvature = kInfeasible;
    return report;
  }

  const Eigen::MatrixXd reduced = basis.transpose() * report.hessian * basis;
  if (weak.empty()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (reduced + reduced.transpose()));
    report.min_curvature = eig.eigenvalues().minCoeff();
    report.directions_checked = static_cast<int>(basis.cols());
    report.pass = report.min_curvature > tol;
    return report;
  }

  // Weakly active constraints cut the subspace to a polyhedral cone; sample it.
  constexpr int kDirections = 512;
  constexpr int kBases[3] = {2, 3, 5};
  report.min_curvature = kInfeasible;
  const Eigen::Index r = basis.cols();
  for (int s = 1; s <= kDirections; ++s) {
    Eigen::VectorXd w(r);
    for (Eigen::Index j = 0; j < r; ++j)
      w(j) = 2.0 * radical_inverse(s, kBases[j]) - 1.0;
    if (w.norm() < 1e-12) continue;
    w.normalize();
    const ParamVector z = basis * w;
    bool in_cone = true;
    for (const auto& g : weak) in_cone = in_cone && g.dot(z) <= 1e-12;
    if (!in_cone) continue;
    report.min_curvature = std::min(report.min_curvature, w.dot(reduced * w));
    ++report.directions_checked;
  }
  report.pass = report.min_curvature > tol;
  return report;
}

}  // namespace aldual
