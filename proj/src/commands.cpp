#include "aldual/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "aldual/data.hpp"
#include "aldual/fairness.hpp"
#include "aldual/report_io.hpp"
#include "aldual/toy_problems.hpp"

namespace aldual {

using nlohmann::json;

namespace {

LogLevel g_level = LogLevel::kInfo;

void prepare_output(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + config.output_dir + "': " + ec.message());
  write_json_file(config.output_dir + "/config_echo.json", config.to_json());
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return config.output_dir + "/" + name;
}

/// Std. dev. of each multiplier over the last `window` records; the max over constraints.
double lambda_oscillation(const TrainingTrace& trace, std::size_t window) {
  if (trace.empty() || trace.front().lambda.size() == 0) return 0.0;
  const std::size_t n = std::min(window, trace.size());
  const std::size_t first = trace.size() - n;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < trace.front().lambda.size(); ++i) {
    double mean = 0.0;
    for (std::size_t k = first; k < trace.size(); ++k) mean += trace[k].lambda(i);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t k = first; k < trace.size(); ++k) {
      const double d = trace[k].lambda(i) - mean;
      var += d * d;
    }
    worst = std::max(worst, std::sqrt(var / static_cast<double>(n)));
  }
  return worst;
}

json solve_summary(const SolveResult& r) {
  json j;
  j["termination"] = to_string(r.termination);
  if (!r.message.empty()) j["message"] = r.message;
  j["iterations"] = r.trace.size();
  j["lambda"] = vector_json(r.dual.lambda);
  j["alpha"] = r.dual.alpha;
  if (!r.trace.empty()) {
    j["objective"] = r.trace.back().objective;
    j["slack"] = vector_json(r.trace.back().slack);
  }
  j["lambda_oscillation_last50"] = lambda_oscillation(r.trace, 50);
  return j;
}

AscentConfig resolved_ascent(const RunConfig& config, std::size_t m, const ParamVector& theta0) {
  AscentConfig a = config.ascent;
  const double lambda0 = a.initial_dual.lambda.size() > 0 ? a.initial_dual.lambda(0) : 0.0;
  a.initial_dual.lambda = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), lambda0);
  a.initial_theta = theta0;
  return a;
}

struct MethodRun {
  std::string name;
  SolveResult result;
};

/// Runs the selected methods; "standard-randomized" reuses the standard run.
std::vector<MethodRun> run_methods(const RunConfig& config, const ConstrainedProblem& problem,
                                   const AscentConfig& ascent) {
  std::vector<MethodRun> runs;
  std::optional<SolveResult> standard;
  for (const std::string& method : config.methods()) {
    log_info("running method " + method);
    if (method == "unconstrained") {
      runs.push_back({method, solve_unconstrained(problem, ascent)});
    } else if (method == "augmented") {
      runs.push_back({method, solve_augmented(problem, ascent)});
    } else {
      if (!standard) {
        AscentConfig s = ascent;
        if (s.archive_every < 1) s.archive_every = 1;
        standard = solve_standard(problem, s);
      }
      runs.push_back({method, *standard});
    }
    log_debug(method + ": " + to_string(runs.back().result.termination));
  }
  return runs;
}

std::vector<ParamVector> archive_thetas(const SolveResult& r) {
  std::vector<ParamVector> out;
  out.reserve(r.archive.size());
  for (const ArchivedIterate& a : r.archive) out.push_back(a.theta);
  return out;
}

std::size_t window_start(std::size_t size, double fraction) {
  const auto t0 = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(size)));
  return std::min(t0, size - 1);
}

int write_runs(const RunConfig& config, const std::vector<MethodRun>& runs) {
  int code = kExitOk;
  for (const MethodRun& run : runs) {
    write_trace_file(out_path(config, "trace_" + run.name + ".jsonl"), run.result.trace);
    if (run.result.termination == Termination::kDiverged) {
      log_info(run.name + " diverged: " + run.result.message);
      code = kExitInvariant;
    }
  }
  return code;
}

int train_toy(const RunConfig& config) {
  const ConstrainedProblem problem = builtin_problem(config.problem);
  const AscentConfig ascent = resolved_ascent(
      config, problem.num_constraints(), ParamVector::Zero(problem.domain.dimension()));
  const std::vector<MethodRun> runs = run_methods(config, problem, ascent);

  json methods = json::object();
  for (const MethodRun& run : runs) {
    json j = solve_summary(run.result);
    j["theta"] = vector_json(run.result.theta);
    if (run.name == "standard-randomized" && !run.result.archive.empty()) {
      // Expected risks of the uniform draw over the archive window.
      const std::size_t t0 = window_start(run.result.archive.size(),
                                          config.fairness.randomized_window_start);
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(
          static_cast<Eigen::Index>(problem.num_constraints()) + 1);
      for (std::size_t k = t0; k < run.result.archive.size(); ++k)
        mean += evaluate_risks(problem, run.result.archive[k].theta);
      mean /= static_cast<double>(run.result.archive.size() - t0);
      j["expected_objective"] = mean(0);
      j["expected_slack"] = vector_json(mean.tail(mean.size() - 1));
      j["window"] = {t0, run.result.archive.size()};
    }
    methods[run.name] = j;
  }
  const int code = write_runs(config, runs);
  write_json_file(out_path(config, "metrics.json"),
                  {{"task", config.problem}, {"methods", methods}});
  return code;
}

int train_fairness(const RunConfig& config) {
  TabularDataset all;
  if (!config.data.csv.empty()) {
    const DatasetSchema schema = load_schema_json(config.data.schema);
    schema.validate(true);
    all = load_csv(config.data.csv, schema);
  } else {
    all = synthesize_biased(config.data.synthetic_rows, config.seed, config.data.synthetic_bias);
  }
  auto [train, test] = train_test_split(all, config.data.split_fraction, config.seed);
  log_info("train rows " + std::to_string(train.rows()) + ", test rows " +
           std::to_string(test.rows()));

  std::vector<int> widths{static_cast<int>(train.input_width())};
  widths.insert(widths.end(), config.fairness.hidden.begin(), config.fairness.hidden.end());
  widths.push_back(2);
  const Mlp model(widths);

  FairnessConstraintSpec spec;
  spec.threshold = config.fairness.threshold;
  spec.probability_floor = config.fairness.probability_floor;
  if (config.fairness.transforms.empty()) {
    spec.transforms = default_flip_transforms(train);
  } else {
    for (const std::string& name : config.fairness.transforms)
      spec.transforms.push_back(flip_transform_by_name(train, name));
  }
  const ConstrainedProblem problem = make_fairness_problem(model, train, spec);
  const std::size_t m = problem.num_constraints();
  const AscentConfig ascent = resolved_ascent(config, m, model.initial_params(config.seed));
  const std::vector<MethodRun> runs = run_methods(config, problem, ascent);

  // Hoeffding plug-ins for the constraint slacks at the training size.
  Eigen::VectorXd zeta(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i)
    zeta(static_cast<Eigen::Index>(i)) =
        hoeffding_zeta(*problem.constraints[i].range, static_cast<std::size_t>(train.rows()), 0.05);

  json methods = json::object();
  for (const MethodRun& run : runs) {
    json j = solve_summary(run.result);
    json flips = json::object();
    json train_flips = json::object();
    if (run.name == "standard-randomized") {
      const std::vector<ParamVector> archive = archive_thetas(run.result);
      if (archive.empty()) throw ProblemError("standard run produced no archive");
      const std::size_t t0 = window_start(archive.size(), config.fairness.randomized_window_start);
      RandomizedPredictor predictor(archive, t0, config.seed);
      j["window"] = {t0, archive.size()};
      j["train_accuracy"] = randomized_accuracy(model, predictor, train);
      j["test_accuracy"] = randomized_accuracy(model, predictor, test);
      for (const FlipTransform& rho : spec.transforms) {
        train_flips[rho.name] = randomized_flip_rate(model, predictor, train, rho);
        flips[rho.name] = randomized_flip_rate(model, predictor, test, rho);
      }
    } else {
      const ParamVector& theta = run.result.theta;
      j["train_accuracy"] = accuracy(model, theta, train);
      j["test_accuracy"] = accuracy(model, theta, test);
      for (const FlipTransform& rho : spec.transforms) {
        train_flips[rho.name] = counterfactual_flip_rate(model, theta, train, rho);
        flips[rho.name] = counterfactual_flip_rate(model, theta, test, rho);
      }
    }
    j["train_flip_rate"] = train_flips;
    j["test_flip_rate"] = flips;
    if (run.name != "standard-randomized" && !run.result.trace.empty()) {
      const Eigen::VectorXd& slack = run.result.trace.back().slack;
      j["slacks_within_zeta"] = (slack.array() <= zeta.array()).all();
    }
    methods[run.name] = j;
  }

  json constraints = json::array();
  for (std::size_t i = 0; i < m; ++i)
    constraints.push_back({{"name", spec.transforms[i].name},
                           {"threshold", spec.threshold},
                           {"zeta", zeta(static_cast<Eigen::Index>(i))}});
  json dataset = {{"source", config.data.csv.empty() ? "synthetic" : config.data.csv},
                  {"rows", all.rows()},
                  {"dropped_rows", all.dropped_rows},
                  {"train_rows", train.rows()},
                  {"test_rows", test.rows()},
                  {"input_width", train.input_width()}};
  const int code = write_runs(config, runs);
  write_json_file(out_path(config, "metrics.json"),
                  {{"task", "fairness"},
                   {"dataset", dataset},
                   {"model", {{"widths", widths}, {"num_params", model.num_params()}}},
                   {"constraints", constraints},
                   {"methods", methods}});
  return code;
}

}  // namespace

LogLevel log_level_from_env() {
  const char* raw = std::getenv("ALDUAL_LOG_LEVEL");
  if (raw == nullptr) return LogLevel::kInfo;
  const std::string v(raw);
  if (v == "quiet" || v == "0") return LogLevel::kQuiet;
  if (v == "debug" || v == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void set_log_level(LogLevel level) { g_level = level; }

void log_info(const std::string& message) {
  if (g_level >= LogLevel::kInfo) std::cerr << "[aldual] " << message << '\n';
}

void log_debug(const std::string& message) {
  if (g_level >= LogLevel::kDebug) std::cerr << "[aldual:debug] " << message << '\n';
}

int cmd_verify_duality(const RunConfig& config) {
  prepare_output(config);
  const ConstrainedProblem problem = builtin_problem(config.problem);
  const GridSpec& grid = config.oracle.grid;
  log_info("tabulating " + config.problem);
  const ThetaTable table = tabulate(problem, grid.theta);
  const DualSurface surface = dual_surface(table, grid);
  const DualityReport report = duality_report(table, surface);

  json doc = duality_report_json(report);
  doc["problem"] = config.problem;
  doc["tolerance"] = config.oracle.tolerance;

  bool ok = report.weak_duality_violations == 0 && report.dominance_violations == 0 &&
            report.alpha_monotonicity_violations == 0;
  if (report.resolution > config.oracle.tolerance) {
    doc["error"] = "grid resolution bound exceeds the requested tolerance";
    ok = false;
  }

  const std::size_t m = problem.num_constraints();
  if (m > 0) {
    const std::vector<AxisGrid> u_grid(m, grid.perturbation.front());
    const std::vector<PerturbationPoint> ptable = perturbation_table(table, u_grid);
    const StabilityCheck check = second_order_stability_check(
        ptable, report.lambda_bar, report.alpha_bar, config.oracle.stability_radius, 1e-12);
    doc["second_order_stability"] = stability_json(check);
    // g(λ, α) = inf_v p(v) + ⟨λ, v⟩ + α‖v‖², so a dual maximizer certifies the
    // quadratic bound with curvature 2ᾱ in the (ᾱ/2)‖u‖² form.
    const StabilityCheck scaled = second_order_stability_check(
        ptable, report.lambda_bar, 2.0 * report.alpha_bar, config.oracle.stability_radius, 1e-12);
    doc["second_order_stability_dual_scaled"] = stability_json(scaled);
  }
  doc["status"] = ok ? "ok" : "violated";
  write_json_file(out_path(config, "duality_report.json"), doc);
  write_json_file(out_path(config, "dual_surface.json"), dual_surface_json(surface));
  log_info("inf_P " + std::to_string(report.inf_P) + ", gap_augmented " +
           std::to_string(report.gap_augmented) + ", gap_standard " +
           std::to_string(report.gap_standard));
  return ok ? kExitOk : kExitInvariant;
}

int cmd_train(const RunConfig& config) {
  prepare_output(config);
  return config.is_fairness_task() ? train_fairness(config) : train_toy(config);
}

int cmd_pacc(const RunConfig& config) {
  prepare_output(config);
  HarnessConfig harness = config.pacc;
  harness.seed = config.seed;
  const HarnessReport report = empirical_pacc_harness(harness);
  json doc = harness_report_json(report);

  // Bound arithmetic at the largest N with the population multipliers.
  if (!report.rows.empty()) {
    const HarnessRow& last = report.rows.back();
    const std::size_t m = report.num_constraints;
    doc["bound_at_largest_n"] = pacc_bound_json(
        pacc_bounds(report.lambda_star, m > 0 ? report.alpha_star : 0.0, report.lambda_star,
                    m > 0 ? report.alpha_star : 0.0, last.zeta, m, report.delta));
  }
  write_json_file(out_path(config, "pacc_report.json"), doc);
  for (const HarnessRow& row : report.rows)
    log_info("N=" + std::to_string(row.samples) + " median gap " +
             std::to_string(row.median_abs_gap) + " median violation " +
             std::to_string(row.median_max_violation));
  return kExitOk;
}

int run_command(const RunConfig& config) {
  try {
    config.validate();
    switch (config.command) {
      case Command::kVerifyDuality: return cmd_verify_duality(config);
      case Command::kTrain: return cmd_train(config);
      case Command::kPacc: return cmd_pacc(config);
    }
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ProblemError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
}

}  // namespace aldual
