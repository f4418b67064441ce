#pragma once

#include <string>
#include <vector>

#include "fracgelfand/config.hpp"

namespace fracgelfand {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3 };

struct CommandOutcome {
  int exit_code = exit_ok;
  std::vector<std::string> files;  ///< written files, in writing order
  std::string message;             ///< error description, naming the failing stage
};

const std::vector<std::string>& command_names();

/// Loads the configuration and runs one command. Configuration problems return exit_config
/// before anything is written; numerical failures return exit_numerical. FRACGELFAND_OUT,
/// when set, replaces output.dir.
CommandOutcome run_command(const std::string& command, const std::string& config_path);

CommandOutcome run_command(const std::string& command, const RunConfig& config);

}  // namespace fracgelfand
