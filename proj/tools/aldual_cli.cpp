// aldual: duality verification, constrained training and PACC harness runs.
//
// Precedence: built-in defaults < --config file < command-line flags.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "aldual/commands.hpp"
#include "aldual/run_config.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string problem;
  std::string method;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--problem", f.problem, "toy-qp | nonconvex-1d | concave-1d | fairness");
  sub->add_option("--method", f.method,
                  "unconstrained | standard | standard-randomized | augmented | all");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace aldual;
  set_log_level(log_level_from_env());

  CLI::App app{"Augmented-Lagrangian constrained learning toolkit"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* verify = app.add_subcommand("verify-duality", "brute-force duality report");
  CLI::App* train = app.add_subcommand("train", "train with the selected methods");
  CLI::App* pacc = app.add_subcommand("pacc", "empirical PACC harness");
  for (CLI::App* sub : {verify, train, pacc}) add_common(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Command command = parse_command(app.get_subcommands().front()->get_name());
    nlohmann::json file;
    if (!flags.config.empty()) file = read_json_file(flags.config);
    std::optional<std::string> problem;
    if (!flags.problem.empty()) problem = flags.problem;
    RunConfig config = parse_run_config(command, file, problem);
    if (!flags.out.empty()) config.output_dir = flags.out;
    if (flags.seed) config.seed = *flags.seed;
    if (!flags.method.empty()) config.method = flags.method;
    return run_command(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
}
