// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "aldual/augmented_lagrangian.hpp"
#include "aldual/commands.hpp"
#include "aldual/data.hpp"
#include "aldual/dual_ascent.hpp"
#include "aldual/fairness.hpp"
#include "aldual/oracle.hpp"
#include "aldual/pacc.hpp"
#include "aldual/run_config.hpp"
#include "aldual/toy_problems.hpp"

using namespace aldual;
using nlohmann::json;

namespace {

// Independent NumPy evaluation of the nonconvex problem on the same grids.
constexpr double kNonconvexInfP = -0.415775597929648;
constexpr double kNonconvexGapStd = 0.293338422548036;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run(int id, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++g_failures;
  std::printf("CRITERION %2d: %s  (%s; %.2fs of %.0fs%s)\n", id, ok ? "PASS" : "FAIL",
              o.detail.c_str(), secs, budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

GridSpec grid_1d() {
  GridSpec g;
  g.theta = {AxisGrid{-3.0, 3.0, 6001}};
  g.perturbation = {AxisGrid{-0.5, 0.5, 101}};
  g.lambda = AxisGrid{0.0, 10.0, 201};
  g.log10_alpha = AxisGrid{-2.0, 4.0, 61};
  return g;
}

const ThetaTable& table_for(const std::string& id) {
  static const ThetaTable toy = tabulate(make_toy_qp(), grid_1d().theta);
  static const ThetaTable nonconvex = tabulate(make_nonconvex_1d(), grid_1d().theta);
  return id == "toy-qp" ? toy : nonconvex;
}

Outcome kernel_identity() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> xs(-2.0, 2.0), ls(0.0, 10.0), la(-2.0, 4.0);
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double x = xs(rng), lambda = ls(rng), alpha = std::pow(10.0, la(rng));
    const double lhs = alpha * psi(x, lambda / alpha);
    const double a = std::max(0.0, lambda + 2.0 * alpha * x);
    const double rhs = (a * a - lambda * lambda) / (4.0 * alpha);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    worst = std::max(worst, std::abs(scaled_psi(x, lambda, alpha) - rhs) /
                                std::max(1.0, std::abs(rhs)));
  }
  const bool exact = psi(0.0, 0.0) == 0.0 && psi(-1.0, 1.0) == -0.25 && psi(1.0, 1.0) == 2.0;
  return {worst <= 1e-12 && exact,
          fmt("max scaled error %.2e over 1e4 triples, fixed points ", worst) +
              (exact ? "exact" : "WRONG")};
}

Outcome weak_duality() {
  std::ostringstream detail;
  bool ok = true;
  for (const std::string id : {"toy-qp", "nonconvex-1d"}) {
    const ThetaTable& t = table_for(id);
    const DualSurface s = dual_surface(t, grid_1d());
    const double inf_p = brute_inf_P(t).value;
    int bad = 0;
    for (Eigen::Index l = 0; l < s.augmented.rows(); ++l)
      for (Eigen::Index a = 0; a < s.augmented.cols(); ++a) {
        const double g = s.augmented(l, a);
        if (!(s.standard(l) <= g + 1e-12) || !(g <= inf_p + t.resolution)) ++bad;
      }
    const DualityReport r = duality_report(t, s);
    bad += r.weak_duality_violations + r.dominance_violations;
    ok = ok && bad == 0;
    detail << id << ": " << bad << " violations over " << s.augmented.size() << " nodes; ";
  }
  return {ok, detail.str()};
}

Outcome strong_duality() {
  const DualityReport toy = duality_report(table_for("toy-qp"), dual_surface(table_for("toy-qp"), grid_1d()));
  const DualityReport nc =
      duality_report(table_for("nonconvex-1d"), dual_surface(table_for("nonconvex-1d"), grid_1d()));
  const double bound = 10.0 * nc.resolution;
  const bool fixture = std::abs(nc.inf_P - kNonconvexInfP) <= 1e-12 &&
                       std::abs(nc.gap_standard - kNonconvexGapStd) <= 1e-10;
  const bool ok = toy.gap_augmented <= 1e-3 && nc.gap_augmented <= bound &&
                  nc.gap_standard > bound && fixture;
  return {ok, fmt("toy gap_aug %.2e; nonconvex gap_aug %.2e, gap_std %.4f vs 10x bound %.4f",
                  toy.gap_augmented, nc.gap_augmented, nc.gap_standard, bound) +
                  (fixture ? ", fixture match" : ", FIXTURE MISMATCH")};
}

Outcome concavity() {
  const GridSpec grid = grid_1d();
  std::ostringstream detail;
  bool ok = true;
  for (const std::string id : {"toy-qp", "nonconvex-1d"}) {
    const ThetaTable& t = table_for(id);
    const DualSurface s = dual_surface(t, grid);
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> li(0, grid.lambda.points - 1), ai(0, grid.log10_alpha.points - 1);
    int violations = 0;
    double worst = 0.0;
    for (int n = 0; n < 500; ++n) {
      const int l1 = li(rng), l2 = li(rng), a1 = ai(rng), a2 = ai(rng);
      const double lam = 0.5 * (grid.lambda.node(l1) + grid.lambda.node(l2));
      const double alp = 0.5 * (s.alphas(a1) + s.alphas(a2));
      const double mid = dual_value(t, {Eigen::VectorXd::Constant(1, lam), alp});
      const double avg = 0.5 * (s.augmented(l1, a1) + s.augmented(l2, a2));
      const double shortfall = avg - mid;
      worst = std::max(worst, shortfall);
      if (shortfall > 1e-9 * std::max(1.0, std::abs(avg))) ++violations;
    }
    int monotone = 0;
    for (Eigen::Index l = 0; l < s.augmented.rows(); ++l)
      for (Eigen::Index a = 1; a < s.augmented.cols(); ++a)
        if (s.augmented(l, a) < s.augmented(l, a - 1) - 1e-12) ++monotone;
    ok = ok && violations == 0 && monotone == 0;
    detail << id << ": " << violations << " midpoint violations (worst shortfall "
           << worst << "), " << monotone << " alpha-monotonicity breaks; ";
  }
  return {ok, detail.str()};
}

Outcome toy_solver() {
  const ConstrainedProblem p = make_toy_qp();
  const AscentConfig cfg = default_toy_ascent(1);
  const SolveResult aug = solve_augmented(p, cfg);
  AscentConfig std_cfg = cfg;
  std_cfg.outer_iters = 100;
  const SolveResult std_run = solve_standard(p, std_cfg);
  const double obj = aug.trace.back().objective, slack = aug.trace.back().slack(0);
  const double lam = std_run.dual.lambda(0);
  const bool ok = std::abs(obj - 1.0) <= 1e-3 && slack <= 1e-3 && std::abs(lam - 2.0) <= 1e-2;
  return {ok, fmt("augmented objective %.6f slack %.2e; standard lambda %.6f", obj, slack, lam)};
}

Outcome primal_convergence() {
  std::ostringstream detail;
  bool ok = true;
  for (const std::string id : {"toy-qp", "nonconvex-1d"}) {
    const ConstrainedProblem p = builtin_problem(id);
    const double inf_p = brute_inf_P(table_for(id)).value;
    const SolveResult r = solve_augmented(p, default_toy_ascent(1));
    const double slack = r.trace.back().slack.maxCoeff();
    const double err = std::abs(r.trace.back().objective - inf_p);
    ok = ok && slack <= 1e-3 && err <= 1e-2;
    detail << id << " augmented: slack " << slack << ", |obj - infP| " << err << "; ";
  }
  const SolveResult s = solve_standard(make_nonconvex_1d(), default_toy_ascent(1));
  const double s_slack = s.trace.back().slack(0);
  const double s_err = std::abs(s.trace.back().objective - kNonconvexInfP);
  const bool misses = s_slack > 1e-3 || s_err > 1e-2;
  ok = ok && misses;
  detail << "nonconvex standard: slack " << s_slack << ", |obj - infP| " << s_err
         << (misses ? " (misses)" : " (DOES NOT MISS)");
  return {ok, detail.str()};
}

Outcome stability() {
  const ThetaTable& t = table_for("toy-qp");
  const GridSpec grid = grid_1d();
  const DualityReport r = duality_report(t, dual_surface(t, grid));
  const auto table = perturbation_table(t, grid.perturbation);
  const StabilityCheck pair = second_order_stability_check(table, r.lambda_bar, r.alpha_bar, 0.5);
  const StabilityCheck control = second_order_stability_check(table, Eigen::VectorXd::Zero(1), 0.0, 0.5);
  const bool ok = pair.pass && pair.max_violation == 0.0 && !control.pass;
  return {ok, fmt("argmax pair (%.2f, %.2f): max violation %.1e over %.0f points",
                  r.lambda_bar(0), r.alpha_bar, pair.max_violation,
                  static_cast<double>(pair.points_checked)) +
                  fmt("; (0,0) control max violation %.3f", control.max_violation) +
                  (control.pass ? " (CONTROL PASSED)" : " (control fails)")};
}

// COMPAS-shaped rows with a binary and a six-level protected attribute.
TabularDataset compas_shaped(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> age(18, 70), priors(0, 12), juv(0, 2), coin(0, 1), race(0, 5);
  const char* races[] = {"Caucasian", "African-American", "Hispanic", "Other", "Asian",
                         "Native American"};
  std::ostringstream csv;
  csv << "age,priors_count,juv_fel_count,juv_misd_count,juv_other_count,c_charge_degree,sex,race,"
         "two_year_recid\n";
  for (std::size_t r = 0; r < n; ++r)
    csv << age(rng) << ',' << priors(rng) << ',' << juv(rng) << ',' << juv(rng) << ','
        << juv(rng) << ',' << (coin(rng) ? "F" : "M") << ',' << (coin(rng) ? "Male" : "Female")
        << ',' << races[race(rng)] << ',' << coin(rng) << '\n';
  std::istringstream in(csv.str());
  return parse_csv(in, load_schema_json(std::string(ALDUAL_SOURCE_DIR) + "/data/compas_schema.json"));
}

Outcome gradient_check() {
  const TabularDataset data = compas_shaped(80, 3);
  const Mlp model = Mlp::with_default_hidden(static_cast<int>(data.input_width()));
  FairnessConstraintSpec spec;
  spec.transforms = default_flip_transforms(data);
  const ConstrainedProblem p = make_fairness_problem(model, data, spec);
  const auto m = static_cast<Eigen::Index>(p.num_constraints());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ls(0.0, 3.0), la(-1.0, 2.0), scale(1.0, 6.0);
  double worst = 0.0;
  for (int probe = 0; probe < 50; ++probe) {
    const ParamVector theta = model.initial_params(1000 + probe) * scale(rng);
    DualState dual{Eigen::VectorXd(m), std::pow(10.0, la(rng))};
    for (Eigen::Index i = 0; i < m; ++i) dual.lambda(i) = ls(rng);
    const ParamVector g = augmented_lagrangian_grad_theta(p, theta, dual);
    const ParamVector fd = finite_difference_gradient(
        [&](const ParamVector& t) { return augmented_lagrangian(p, t, dual); }, theta, 1e-5);
    worst = std::max(worst, (g - fd).norm() / std::max(1e-12, fd.norm()));
  }
  return {worst <= 1e-4,
          fmt("max relative error %.2e over 50 probes, %.0f constraints, %.0f parameters", worst,
              static_cast<double>(m), static_cast<double>(model.num_params()))};
}

Outcome fairness_direction() {
  RunConfig cfg = RunConfig::defaults(Command::kTrain);
  const std::string compas = std::string(ALDUAL_SOURCE_DIR) + "/data/compas-scores-two-years.csv";
  std::string source = "synthetic biased generator";
  if (std::filesystem::exists(compas)) {
    cfg.data.csv = compas;
    cfg.data.schema = std::string(ALDUAL_SOURCE_DIR) + "/data/compas_schema.json";
    source = "COMPAS export";
  }
  cfg.output_dir = (std::filesystem::temp_directory_path() / "aldual_acceptance_train").string();
  set_log_level(LogLevel::kQuiet);
  const int code = run_command(cfg);
  if (code != 0) return {false, "train exited with code " + std::to_string(code)};
  std::ifstream in(cfg.output_dir + "/metrics.json");
  const json metrics = json::parse(in);
  const json& aug = metrics["methods"]["augmented"];
  const json& unc = metrics["methods"]["unconstrained"];
  const json& std_m = metrics["methods"]["standard"];

  bool flips_lower = true;
  std::ostringstream detail;
  detail << source << "; test flip rate unconstrained -> augmented:";
  for (const auto& [name, rate] : aug["test_flip_rate"].items()) {
    const double u = unc["test_flip_rate"][name].get<double>();
    flips_lower = flips_lower && rate.get<double>() < u;
    detail << ' ' << name << ' ' << u << " -> " << rate.get<double>();
  }
  bool within_zeta = true;
  const json& slack = aug["slack"];
  for (std::size_t i = 0; i < slack.size(); ++i)
    within_zeta = within_zeta &&
                  slack[i].get<double>() <= metrics["constraints"][i]["zeta"].get<double>();
  const double osc_aug = aug["lambda_oscillation_last50"].get<double>();
  const double osc_std = std_m["lambda_oscillation_last50"].get<double>();
  detail << "; max slack " << *std::max_element(slack.begin(), slack.end())
         << (within_zeta ? " <= zeta" : " > zeta") << "; lambda oscillation aug " << osc_aug
         << " vs std " << osc_std;
  return {flips_lower && within_zeta && osc_aug < osc_std, detail.str()};
}

Outcome pacc() {
  const PaccBound b = pacc_bounds(Eigen::VectorXd::Constant(1, 2.0), 1.0,
                                  Eigen::VectorXd::Constant(1, 0.5), 1.0,
                                  Eigen::Vector2d(0.1, 0.1), 1, 0.05);
  const bool arithmetic = std::abs(b.optimality_bound - 0.41) <= 1e-15;
  HarnessConfig h;
  h.sample_sizes = {250, 1000, 4000};
  h.trials = 20;
  h.solver = HarnessConfig::default_solver();
  const HarnessReport r = empirical_pacc_harness(h);
  bool monotone = true;
  std::ostringstream detail;
  detail << "bound " << b.optimality_bound << (arithmetic ? " == 0.41" : " != 0.41")
         << "; medians |P*-l0| / max violation by N:";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const HarnessRow& row = r.rows[i];
    detail << ' ' << row.samples << ": " << row.median_abs_gap << " / " << row.median_max_violation;
    if (i > 0)
      monotone = monotone && row.median_abs_gap < r.rows[i - 1].median_abs_gap &&
                 row.median_max_violation < r.rows[i - 1].median_max_violation;
    monotone = monotone && row.failures == 0;
  }
  return {arithmetic && monotone, detail.str()};
}

}  // namespace

int main() {
  run(1, 1.0, kernel_identity);
  run(2, 30.0, weak_duality);
  run(3, 30.0, strong_duality);
  run(4, 30.0, concavity);
  run(5, 5.0, toy_solver);
  run(6, 30.0, primal_convergence);
  run(7, 10.0, stability);
  run(8, 30.0, gradient_check);
  run(9, 300.0, fairness_direction);
  run(10, 600.0, pacc);
  std::printf("%s: %d of 10 criteria failed\n", g_failures == 0 ? "ACCEPTED" : "REJECTED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
