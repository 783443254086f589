#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace curvflow {

// Every violation found during validation, reported together.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> v);
  std::vector<std::string> violations;
};

struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 0;
  bool emit_gnuplot = false;
  nlohmann::json params;  // validated subcommand block
};

// Validates the subcommand parameter block (types, ranges, unknown keys) and
// returns the run configuration; throws ConfigError listing every violation.
RunConfig parse_config(const std::string& subcommand, const nlohmann::json& params);

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariantFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalFailure = 3;

// Dispatch and run; outputs are written atomically. Returns a process exit
// code (0 success, 1 invariant-check failure, 3 numerical failure).
int execute(const RunConfig& cfg);

std::string version_string();

}  // namespace curvflow
