#pragma once

#include <string>

#include "aldual/run_config.hpp"

namespace aldual {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvariant = 1,
  kExitUsage = 2,
  kExitIo = 3,
};

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

/// Reads ALDUAL_LOG_LEVEL (quiet|info|debug); defaults to info.
LogLevel log_level_from_env();
void set_log_level(LogLevel level);
void log_info(const std::string& message);
void log_debug(const std::string& message);

/// Each command writes config_echo.json plus its own outputs into
/// config.output_dir and returns an exit code. Errors propagate as exceptions.
int cmd_verify_duality(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_pacc(const RunConfig& config);

/// Validates, dispatches on config.command and maps exceptions to exit codes.
int run_command(const RunConfig& config);

}  // namespace aldual
