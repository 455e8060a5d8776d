#pragma once

// The four batch commands behind the kds executable. Each takes the parsed
// JSON configuration, writes its outputs plus manifest.json into the output
// directory and returns the process exit code:
//   0 pass, 1 usage/config, 2 mathematical precondition, 3 claim failure,
//   4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kds/io.hpp"

namespace kds::cli {

enum Exit { kPass = 0, kUsage = 1, kPrecondition = 2, kClaimFailure = 3, kNumerical = 4 };

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  std::filesystem::path out = ".";
};

struct CommandOutcome {
  int exit_code = kPass;
  io::json report;  // the main JSON document that was written
  std::map<std::string, std::string> verdicts;
  std::vector<std::string> outputs;  // file names inside the output directory
};

CommandOutcome cmd_params(const io::json& config, const RunOptions& options, std::ostream& log);
CommandOutcome cmd_trap(const io::json& config, const RunOptions& options, std::ostream& log);
CommandOutcome cmd_qnm(const io::json& config, const RunOptions& options, std::ostream& log);
CommandOutcome cmd_certify(const io::json& config, const RunOptions& options, std::ostream& log);

// Dispatches by name, unwraps a manifest given as config, maps kds::Error to
// its exit code and writes the manifest.
int run_command(const std::string& name, const io::json& config, const RunOptions& options,
                std::ostream& log);

}  // namespace kds::cli
