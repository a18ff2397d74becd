#include "aldual/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "aldual/toy_problems.hpp"

namespace aldual {

using nlohmann::json;

Command parse_command(const std::string& name) {
  if (name == "verify-duality") return Command::kVerifyDuality;
  if (name == "train") return Command::kTrain;
  if (name == "pacc") return Command::kPacc;
  throw ConfigError("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::kVerifyDuality: return "verify-duality";
    case Command::kTrain: return "train";
    case Command::kPacc: return "pacc";
  }
  return "unknown";
}

AscentConfig default_toy_ascent(std::size_t num_constraints) {
  AscentConfig c;
  c.growth_factor = 2.0;
  c.growth_interval = 5;
  c.outer_iters = 60;
  c.initial_dual.lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_constraints));
  c.initial_dual.alpha = 1.0;
  c.epsilon0 = 1e-4;
  c.epsilon_decay = 0.9;
  c.dual_step = 0.5;
  c.inner.method = InnerMethod::kGradientDescent;
  c.inner.line_search = true;
  c.inner.step_size = 0.5;
  c.inner.max_steps = 5000;
  c.inner.grad_tol = 1e-10;
  c.inner.multistart_per_axis = 8;
  return c;
}

AscentConfig default_fairness_ascent() {
  AscentConfig c;
  c.growth_factor = 1.5;
  c.growth_interval = 20;
  c.outer_iters = 300;
  c.initial_dual.alpha = 1.0;
  c.epsilon0 = 1e-3;
  c.epsilon_decay = 0.99;
  c.dual_step = 1.0;
  c.inner.method = InnerMethod::kMomentum;
  c.inner.line_search = false;
  c.inner.step_size = 0.5;
  c.inner.momentum = 0.9;
  c.inner.max_steps = 20;
  c.inner.grad_tol = 1e-6;
  c.archive_every = 1;
  return c;
}

RunConfig RunConfig::defaults(Command command, const std::string& problem) {
  RunConfig c;
  c.command = command;
  switch (command) {
    case Command::kVerifyDuality:
      c.problem = problem.empty() ? "toy-qp" : problem;
      break;
    case Command::kTrain:
      c.problem = problem.empty() ? "fairness" : problem;
      break;
    case Command::kPacc:
      c.problem = problem.empty() ? "regression-family" : problem;
      break;
  }
  // θ grid follows the builtin problem's box, 6001 nodes per axis.
  c.oracle.grid.theta = {AxisGrid{-3.0, 3.0, 6001}};
  if (command == Command::kVerifyDuality) {
    try {
      const ParamDomain domain = builtin_problem(c.problem).domain;
      if (domain.bounded()) {
        c.oracle.grid.theta.clear();
        for (Eigen::Index j = 0; j < domain.dimension(); ++j)
          c.oracle.grid.theta.push_back(AxisGrid{domain.lower()(j), domain.upper()(j), 6001});
      }
    } catch (const ProblemError&) {
      // Invalid ids are reported by validate().
    }
  }
  c.oracle.grid.perturbation = {AxisGrid{-0.5, 0.5, 101}};
  c.oracle.grid.lambda = AxisGrid{0.0, 10.0, 201};
  c.oracle.grid.log10_alpha = AxisGrid{-2.0, 4.0, 61};

  if (command == Command::kTrain && c.problem != "fairness")
    c.ascent = default_toy_ascent(1);
  else if (command == Command::kPacc)
    c.ascent = HarnessConfig::default_solver();
  else
    c.ascent = default_fairness_ascent();
  c.ascent.initial_dual.lambda.resize(0);
  c.pacc.solver = HarnessConfig::default_solver();
  return c;
}

std::vector<std::string> RunConfig::methods() const {
  if (method == "all") return {"unconstrained", "standard", "standard-randomized", "augmented"};
  return {method};
}

void RunConfig::validate() const {
  static const std::set<std::string> kMethods = {
      "unconstrained", "standard", "standard-randomized", "augmented", "all"};
  if (!kMethods.count(method)) throw ConfigError("unknown method '" + method + "'");
  if (output_dir.empty()) throw ConfigError("output directory must be set");
  try {
    switch (command) {
      case Command::kVerifyDuality: {
        const auto ids = builtin_problem_ids();
        if (std::find(ids.begin(), ids.end(), problem) == ids.end())
          throw ConfigError("invalid problem id '" + problem + "'");
        oracle.grid.validate();
        const ParamDomain domain = builtin_problem(problem).domain;
        if (static_cast<Eigen::Index>(oracle.grid.theta.size()) != domain.dimension())
          throw ConfigError("theta grid needs one axis per parameter");
        if (domain.bounded()) {
          for (Eigen::Index j = 0; j < domain.dimension(); ++j) {
            const AxisGrid& a = oracle.grid.theta[static_cast<std::size_t>(j)];
            if (a.lo < domain.lower()(j) || a.hi > domain.upper()(j))
              throw ConfigError("theta grid leaves the problem domain");
          }
        }
        if (!(oracle.tolerance > 0.0)) throw ConfigError("oracle tolerance must be positive");
        if (!(oracle.stability_radius > 0.0))
          throw ConfigError("stability radius must be positive");
        break;
      }
      case Command::kTrain: {
        if (problem != "fairness") {
          const auto ids = builtin_problem_ids();
          if (std::find(ids.begin(), ids.end(), problem) == ids.end())
            throw ConfigError("invalid problem id '" + problem + "'");
        }
        AscentConfig probe = ascent;
        probe.initial_dual.lambda = Eigen::VectorXd::Zero(1);
        probe.validate(1);
        if (!(data.split_fraction > 0.0 && data.split_fraction < 1.0))
          throw ConfigError("split_fraction must lie in (0, 1)");
        if (data.csv.empty() != data.schema.empty())
          throw ConfigError("data.csv and data.schema must be given together");
        if (data.synthetic_rows < 10) throw ConfigError("synthetic_rows must be >= 10");
        if (!(fairness.threshold > 0.0)) throw ConfigError("fairness threshold must be positive");
        if (!(fairness.probability_floor > 0.0 && fairness.probability_floor < 0.5))
          throw ConfigError("probability_floor must lie in (0, 0.5)");
        for (int h : fairness.hidden)
          if (h <= 0) throw ConfigError("hidden widths must be positive");
        if (!(fairness.randomized_window_start >= 0.0 && fairness.randomized_window_start < 1.0))
          throw ConfigError("randomized_window_start must lie in [0, 1)");
        break;
      }
      case Command::kPacc: {
        pacc.validate();
        AscentConfig probe = pacc.solver;
        const auto m = static_cast<Eigen::Index>(pacc.family.num_constraints());
        probe.initial_dual.lambda = Eigen::VectorXd::Zero(m);
        probe.validate(pacc.family.num_constraints());
        break;
      }
    }
  } catch (const ProblemError& e) {
    throw ConfigError(e.what());
  }
}

namespace {

// Reads known keys of one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + where(key) + "': " + e.what());
    }
  }

  std::optional<Section> child(const char* key) {
    known_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), where(key));
  }

  const json& raw(const char* key) {
    known_.insert(key);
    return j_.at(key);
  }
  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!known_.count(it.key())) throw ConfigError("unknown key '" + where(it.key()) + "'");
  }

  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

void read_axis(Section& parent, const char* key, AxisGrid& axis) {
  if (auto s = parent.child(key)) {
    s->read("lo", axis.lo);
    s->read("hi", axis.hi);
    s->read("points", axis.points);
    s->finish();
  }
}

json axis_json(const AxisGrid& a) { return {{"lo", a.lo}, {"hi", a.hi}, {"points", a.points}}; }

void read_inner(Section& s, InnerSolverConfig& inner) {
  std::string method = inner.method == InnerMethod::kMomentum ? "momentum" : "gradient-descent";
  s.read("method", method);
  if (method == "momentum")
    inner.method = InnerMethod::kMomentum;
  else if (method == "gradient-descent")
    inner.method = InnerMethod::kGradientDescent;
  else
    throw ConfigError("unknown inner method '" + method + "'");
  s.read("step_size", inner.step_size);
  s.read("max_steps", inner.max_steps);
  s.read("grad_tol", inner.grad_tol);
  s.read("warm_start", inner.warm_start);
  s.read("line_search", inner.line_search);
  s.read("momentum", inner.momentum);
  s.read("multistart_per_axis", inner.multistart_per_axis);
  s.finish();
}

json inner_json(const InnerSolverConfig& inner) {
  return {{"method", inner.method == InnerMethod::kMomentum ? "momentum" : "gradient-descent"},
          {"step_size", inner.step_size},
          {"max_steps", inner.max_steps},
          {"grad_tol", inner.grad_tol},
          {"warm_start", inner.warm_start},
          {"line_search", inner.line_search},
          {"momentum", inner.momentum},
          {"multistart_per_axis", inner.multistart_per_axis}};
}

void read_ascent(Section& s, AscentConfig& a, double& lambda0) {
  s.read("growth_factor", a.growth_factor);
  s.read("growth_interval", a.growth_interval);
  s.read("alpha0", a.initial_dual.alpha);
  s.read("lambda0", lambda0);
  s.read("outer_iters", a.outer_iters);
  s.read("epsilon0", a.epsilon0);
  s.read("epsilon_decay", a.epsilon_decay);
  s.read("dual_step", a.dual_step);
  s.read("project_lambda", a.project_lambda);
  std::string rule = a.lambda_rule == LambdaRule::kPhr ? "phr" : "shifted";
  s.read("lambda_rule", rule);
  if (rule == "phr")
    a.lambda_rule = LambdaRule::kPhr;
  else if (rule == "shifted")
    a.lambda_rule = LambdaRule::kShifted;
  else
    throw ConfigError("unknown lambda_rule '" + rule + "'");
  s.read("phr_damping", a.phr_damping);
  s.read("archive_every", a.archive_every);
  if (s.has("early_stop_tol")) {
    const json& v = s.raw("early_stop_tol");
    if (v.is_null())
      a.early_stop_tol.reset();
    else if (v.is_number())
      a.early_stop_tol = v.get<double>();
    else
      throw ConfigError("early_stop_tol must be a number or null");
  }
  if (auto inner = s.child("inner")) read_inner(*inner, a.inner);
  s.finish();
}

json ascent_json(const AscentConfig& a, double lambda0) {
  return {{"growth_factor", a.growth_factor},
          {"growth_interval", a.growth_interval},
          {"alpha0", a.initial_dual.alpha},
          {"lambda0", lambda0},
          {"outer_iters", a.outer_iters},
          {"epsilon0", a.epsilon0},
          {"epsilon_decay", a.epsilon_decay},
          {"dual_step", a.dual_step},
          {"project_lambda", a.project_lambda},
          {"lambda_rule", a.lambda_rule == LambdaRule::kPhr ? "phr" : "shifted"},
          {"phr_damping", a.phr_damping},
          {"archive_every", a.archive_every},
          {"early_stop_tol", a.early_stop_tol ? json(*a.early_stop_tol) : json(nullptr)},
          {"inner", inner_json(a.inner)}};
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
}

RunConfig parse_run_config(Command command, const json& file,
                           const std::optional<std::string>& problem_override) {
  std::string problem = problem_override.value_or("");
  if (problem.empty() && file.is_object() && file.contains("problem")) {
    if (!file.at("problem").is_string()) throw ConfigError("'problem' must be a string");
    problem = file.at("problem").get<std::string>();
  }
  RunConfig c = RunConfig::defaults(command, problem);
  if (file.is_null()) return c;

  Section root(file, "");
  std::string ignored_problem;
  root.read("problem", ignored_problem);
  if (root.has("command")) {
    std::string name;
    root.read("command", name);
    if (parse_command(name) != command)
      throw ConfigError("config is for command '" + name + "', not '" + to_string(command) + "'");
  }
  root.read("method", c.method);
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);

  double lambda0 = 0.0;
  if (auto s = root.child("ascent")) {
    read_ascent(*s, c.ascent, lambda0);
  }
  if (lambda0 != 0.0) c.ascent.initial_dual.lambda = Eigen::VectorXd::Constant(1, lambda0);

  if (auto s = root.child("oracle")) {
    if (auto t = s->child("theta")) {
      AxisGrid a = c.oracle.grid.theta.front();
      t->read("lo", a.lo);
      t->read("hi", a.hi);
      t->read("points", a.points);
      t->finish();
      c.oracle.grid.theta = {a};
    }
    if (auto t = s->child("perturbation")) {
      AxisGrid a = c.oracle.grid.perturbation.front();
      t->read("lo", a.lo);
      t->read("hi", a.hi);
      t->read("points", a.points);
      t->finish();
      c.oracle.grid.perturbation = {a};
    }
    read_axis(*s, "lambda", c.oracle.grid.lambda);
    read_axis(*s, "log10_alpha", c.oracle.grid.log10_alpha);
    s->read("tolerance", c.oracle.tolerance);
    s->read("stability_radius", c.oracle.stability_radius);
    s->finish();
  }

  if (auto s = root.child("data")) {
    s->read("csv", c.data.csv);
    s->read("schema", c.data.schema);
    s->read("split_fraction", c.data.split_fraction);
    s->read("synthetic_rows", c.data.synthetic_rows);
    s->read("synthetic_bias", c.data.synthetic_bias);
    s->finish();
  }

  if (auto s = root.child("fairness")) {
    s->read("threshold", c.fairness.threshold);
    s->read("transforms", c.fairness.transforms);
    s->read("probability_floor", c.fairness.probability_floor);
    s->read("hidden", c.fairness.hidden);
    s->read("randomized_window_start", c.fairness.randomized_window_start);
    s->finish();
  }

  if (auto s = root.child("pacc")) {
    std::vector<std::size_t> sizes = c.pacc.sample_sizes;
    s->read("sample_sizes", sizes);
    c.pacc.sample_sizes = sizes;
    s->read("trials", c.pacc.trials);
    s->read("delta", c.pacc.delta);
    if (auto f = s->child("family")) {
      std::vector<double> beta{c.pacc.family.beta(0), c.pacc.family.beta(1)};
      f->read("beta", beta);
      if (beta.size() != 2) throw ConfigError("pacc.family.beta needs 2 entries");
      c.pacc.family.beta = Eigen::Vector2d(beta[0], beta[1]);
      f->read("noise", c.pacc.family.noise);
      f->read("budget", c.pacc.family.budget);
      f->read("box", c.pacc.family.box);
      f->read("constrained", c.pacc.family.constrained);
      f->finish();
    }
    if (auto a = s->child("solver")) {
      double unused = 0.0;
      read_ascent(*a, c.pacc.solver, unused);
    }
    s->finish();
  }
  root.finish();
  return c;
}

json RunConfig::to_json() const {
  const double lambda0 = ascent.initial_dual.lambda.size() > 0 ? ascent.initial_dual.lambda(0) : 0.0;
  json j;
  j["command"] = to_string(command);
  j["problem"] = problem;
  j["method"] = method;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["ascent"] = ascent_json(ascent, lambda0);
  j["oracle"] = {{"theta", axis_json(oracle.grid.theta.front())},
                 {"perturbation", axis_json(oracle.grid.perturbation.front())},
                 {"lambda", axis_json(oracle.grid.lambda)},
                 {"log10_alpha", axis_json(oracle.grid.log10_alpha)},
                 {"tolerance", oracle.tolerance},
                 {"stability_radius", oracle.stability_radius}};
  j["data"] = {{"csv", data.csv},
               {"schema", data.schema},
               {"split_fraction", data.split_fraction},
               {"synthetic_rows", data.synthetic_rows},
               {"synthetic_bias", data.synthetic_bias}};
  j["fairness"] = {{"threshold", fairness.threshold},
                   {"transforms", fairness.transforms},
                   {"probability_floor", fairness.probability_floor},
                   {"hidden", fairness.hidden},
                   {"randomized_window_start", fairness.randomized_window_start}};
  j["pacc"] = {{"sample_sizes", pacc.sample_sizes},
               {"trials", pacc.trials},
               {"delta", pacc.delta},
               {"family",
                {{"beta", {pacc.family.beta(0), pacc.family.beta(1)}},
                 {"noise", pacc.family.noise},
                 {"budget", pacc.family.budget},
                 {"box", pacc.family.box},
                 {"constrained", pacc.family.constrained}}},
               {"solver", ascent_json(pacc.solver, 0.0)}};
  return j;
}

}  // namespace aldual
