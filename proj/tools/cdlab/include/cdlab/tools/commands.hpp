#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cdlab/tools/config.hpp"

namespace cdlab::tools {

enum ExitCode : int {
  kExitOk = 0,
  kExitCrash = 1,
  kExitInvalidInput = 2,
  kExitUnboundedEntry = 3,
  kExitValencyTooSmall = 4,
  kExitNumerical = 5,
  kExitChecksFailed = 6,  // `suite` ran but a criterion failed
};

struct RunOptions {
  std::string command;
  std::string config_path;  // empty: built-in defaults (suite only)
  std::string out_dir;
  Overrides overrides;
};

const std::vector<std::string>& command_names();

// Runs one command, writing CSV files and manifest.json into out_dir.
// Diagnostics go to `log`. Never throws.
int run(const RunOptions& options, std::ostream& log);

}  // namespace cdlab::tools
