#ifndef HSFLOW_CLI_HPP_
#define HSFLOW_CLI_HPP_

#include <filesystem>
#include <iosfwd>

#include "hsflow/experiments.hpp"
#include "json.hpp"

namespace hsflow {

enum ExitCode : int { kExitOk = 0, kExitContractFailed = 1, kExitConfigInvalid = 2 };

/// Runs one scenario config in memory. Throws ConfigInvalid on a bad config.
ScenarioResult execute(const nlohmann::json& config);

/// Runs the config and writes result.json plus CSVs into `out`.
/// Returns the process exit code; messages go to `log`.
int run(const nlohmann::json& config, const std::filesystem::path& out, std::ostream& log);

/// Command-line entry point: --config <path> --out <dir> [--seed <u64>].
int cli_main(int argc, char** argv);

}  // namespace hsflow

#endif  // HSFLOW_CLI_HPP_
