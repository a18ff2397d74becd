#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "aldual/commands.hpp"
#include "aldual/run_config.hpp"

using namespace aldual;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("ALDUAL_LOG_LEVEL=quiet ") + ALDUAL_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aldual_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("command names") {
  CHECK(parse_command("train") == Command::kTrain);
  CHECK(to_string(Command::kVerifyDuality) == "verify-duality");
  CHECK_THROWS_AS(parse_command("fit"), ConfigError);
}

TEST_CASE("defaults per command") {
  const RunConfig v = RunConfig::defaults(Command::kVerifyDuality);
  CHECK(v.problem == "toy-qp");
  CHECK(v.oracle.grid.theta.front().points == 6001);
  const RunConfig c = RunConfig::defaults(Command::kVerifyDuality, "concave-1d");
  CHECK(c.oracle.grid.theta.front().lo == -1.0);
  CHECK(RunConfig::defaults(Command::kTrain).problem == "fairness");
  CHECK(RunConfig::defaults(Command::kTrain).methods().size() == 4);
}

TEST_CASE("config overlay and unknown keys") {
  const json file = json::parse(R"({
    "method": "augmented",
    "seed": 3,
    "ascent": {"outer_iters": 7, "inner": {"max_steps": 9}},
    "fairness": {"threshold": 0.02}
  })");
  const RunConfig c = parse_run_config(Command::kTrain, file);
  CHECK(c.method == "augmented");
  CHECK(c.seed == 3);
  CHECK(c.ascent.outer_iters == 7);
  CHECK(c.ascent.inner.max_steps == 9);
  CHECK(c.fairness.threshold == 0.02);

  CHECK_THROWS_AS(parse_run_config(Command::kTrain, json::parse(R"({"sed": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_run_config(Command::kTrain, json::parse(R"({"ascent": {"eta": 1}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_run_config(Command::kTrain, json::parse(R"({"seed": "x"})")), ConfigError);
  CHECK_THROWS_AS(parse_run_config(Command::kPacc, json::parse(R"({"command": "train"})")),
                  ConfigError);
}

TEST_CASE("config echo round trip") {
  for (Command cmd : {Command::kVerifyDuality, Command::kTrain, Command::kPacc}) {
    const RunConfig a = RunConfig::defaults(cmd);
    const RunConfig b = parse_run_config(cmd, a.to_json());
    CHECK(a.to_json() == b.to_json());
  }
}

TEST_CASE("validation maps to usage errors") {
  RunConfig c = RunConfig::defaults(Command::kPacc);
  c.pacc.trials = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig::defaults(Command::kVerifyDuality, "nope");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig::defaults(Command::kTrain);
  c.method = "sgd";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig::defaults(Command::kVerifyDuality);
  c.oracle.grid.theta = {AxisGrid{-5.0, 3.0, 11}};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("cli exit codes") {
  const fs::path out = scratch("codes");
  CHECK(run_cli("verify-duality --problem toy-qp --out " + out.string()) == 0);
  CHECK(fs::exists(out / "duality_report.json"));
  CHECK(fs::exists(out / "config_echo.json"));
  const json report = json::parse(slurp(out / "duality_report.json"));
  CHECK(report["inf_P"].get<double>() == 1.0);
  CHECK(report["status"] == "ok");

  CHECK(run_cli("verify-duality --problem bogus --out " + out.string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("train --method sideways --out " + out.string()) == 2);
  CHECK(run_cli("verify-duality --config /nonexistent/cfg.json --out " + out.string()) == 3);

  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run_cli("verify-duality --config " + bad.string() + " --out " + out.string()) == 2);

  const fs::path zero = out / "zero.json";
  std::ofstream(zero) << R"({"pacc": {"trials": 0}})";
  CHECK(run_cli("pacc --config " + zero.string() + " --out " + out.string()) == 2);

  // Grid too coarse for the requested tolerance.
  const fs::path coarse = out / "coarse.json";
  std::ofstream(coarse) << R"({"oracle": {"theta": {"points": 31}, "tolerance": 1e-3}})";
  CHECK(run_cli("verify-duality --config " + coarse.string() + " --out " + out.string()) == 1);

  // Missing data file.
  const fs::path missing = out / "missing.json";
  std::ofstream(missing) << R"({"data": {"csv": "/nonexistent.csv", "schema": "/nonexistent.json"}})";
  CHECK(run_cli("train --config " + missing.string() + " --out " + out.string()) == 3);
  fs::remove_all(out);
}

TEST_CASE("toy training writes traces with the documented fields") {
  const fs::path out = scratch("toy");
  REQUIRE(run_cli("train --problem nonconvex-1d --method all --out " + out.string()) == 0);
  for (const char* m : {"unconstrained", "standard", "standard-randomized", "augmented"}) {
    const fs::path trace = out / (std::string("trace_") + m + ".jsonl");
    REQUIRE(fs::exists(trace));
    std::ifstream in(trace);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
      const json rec = json::parse(line);
      for (const char* key : {"iter", "lambda", "alpha", "slack", "objective", "inner_steps",
                              "inner_grad_norm"})
        CHECK(rec.contains(key));
      CHECK(rec["iter"].get<int>() == lines);
      ++lines;
    }
    CHECK(lines == 60);
  }
  const json metrics = json::parse(slurp(out / "metrics.json"));
  CHECK(metrics["methods"]["augmented"]["slack"][0].get<double>() <= 1e-3);
  fs::remove_all(out);
}

TEST_CASE("identical seeds give byte-identical outputs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const fs::path cfg = fs::temp_directory_path() / "aldual_cli_test_det.json";
  std::ofstream(cfg) << R"({"ascent": {"outer_iters": 15}, "data": {"synthetic_rows": 300}})";
  REQUIRE(run_cli("train --config " + cfg.string() + " --seed 11 --out " + a.string()) == 0);
  REQUIRE(run_cli("train --config " + cfg.string() + " --seed 11 --out " + b.string()) == 0);
  for (const char* f : {"metrics.json", "trace_augmented.jsonl", "trace_standard.jsonl",
                        "trace_unconstrained.jsonl"})
    CHECK(slurp(a / f) == slurp(b / f));
  // The echo differs only in output_dir.
  json ea = json::parse(slurp(a / "config_echo.json")), eb = json::parse(slurp(b / "config_echo.json"));
  ea.erase("output_dir");
  eb.erase("output_dir");
  CHECK(ea == eb);
  CHECK(ea["seed"] == 11);
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove(cfg);
}

TEST_CASE("pacc without constraints") {
  const fs::path out = scratch("pacc");
  const fs::path cfg = out.string() + ".json";
  std::ofstream(cfg) << R"({"pacc": {"trials": 3, "sample_sizes": [100, 400],
                            "family": {"constrained": false},
                            "solver": {"outer_iters": 5}}})";
  REQUIRE(run_cli("pacc --config " + cfg.string() + " --out " + out.string()) == 0);
  const json report = json::parse(slurp(out / "pacc_report.json"));
  CHECK(report["num_constraints"] == 0);
  CHECK(report["rows"].size() == 2);
  fs::remove_all(out);
  fs::remove(cfg);
}
