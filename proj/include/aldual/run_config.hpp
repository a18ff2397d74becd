#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aldual/dual_ascent.hpp"
#include "aldual/oracle.hpp"
#include "aldual/pacc.hpp"

namespace aldual {

/// Invalid or unknown configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output; maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { kVerifyDuality, kTrain, kPacc };

Command parse_command(const std::string& name);
std::string to_string(Command c);

struct OracleSection {
  GridSpec grid;
  /// verify-duality fails when the grid resolution bound exceeds this.
  double tolerance = 1e-2;
  double stability_radius = 0.5;
};

struct DataSection {
  std::string csv;
  std::string schema;
  double split_fraction = 0.8;
  std::size_t synthetic_rows = 2000;
  double synthetic_bias = 1.5;
};

struct FairnessSection {
  double threshold = 0.005;
  /// Empty means one transform per binary column and non-reference category.
  std::vector<std::string> transforms;
  double probability_floor = 1e-6;
  std::vector<int> hidden{16, 16};
  /// Randomized predictor window starts at this fraction of the archive.
  double randomized_window_start = 0.5;
};

struct RunConfig {
  Command command = Command::kVerifyDuality;
  std::string problem;
  std::string method = "all";
  std::uint64_t seed = 7;
  std::string output_dir = "out";
  AscentConfig ascent;
  OracleSection oracle;
  DataSection data;
  FairnessSection fairness;
  HarnessConfig pacc;

  /// Defaults for the command (and, for train, the problem id).
  static RunConfig defaults(Command command, const std::string& problem = "");

  /// Methods selected by `method` in run order.
  std::vector<std::string> methods() const;
  bool is_fairness_task() const { return problem == "fairness"; }

  void validate() const;
  nlohmann::json to_json() const;
};

/// Starts from the command defaults and overlays `file`; unknown keys throw.
RunConfig parse_run_config(Command command, const nlohmann::json& file,
                           const std::optional<std::string>& problem_override = {});

nlohmann::json read_json_file(const std::string& path);

/// Fairness-task solver defaults.
AscentConfig default_fairness_ascent();
/// Toy-problem solver defaults.
AscentConfig default_toy_ascent(std::size_t num_constraints);

}  // namespace aldual
