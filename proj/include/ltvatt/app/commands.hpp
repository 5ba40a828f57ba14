#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ltvatt/filter.hpp"

namespace ltvatt::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitObservabilityGate = 4,
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::filesystem::path log;    // estimate: sensor log
  std::filesystem::path truth;  // estimate: optional truth log
  std::string omega_source = "profile";  // check-observability: "profile" or a truth CSV path
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::optional<GainMode> mode;
  bool no_reset = false;
  std::optional<double> delta;
  std::optional<double> mu;
  std::optional<int> runs;  // montecarlo: override n_runs
  bool per_run = false;     // montecarlo: also write every trial's error trace
};

/// Each command writes files under options.out and a human summary to `out`.
/// Errors propagate as exceptions; run_command maps them to exit codes.
int simulate(const CommandOptions& options, std::ostream& out);
int estimate(const CommandOptions& options, std::ostream& out);
int check_observability(const CommandOptions& options, std::ostream& out);
int montecarlo(const CommandOptions& options, std::ostream& out);

/// Dispatches by name and converts exceptions to the exit-code contract,
/// printing the message to `err`.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace ltvatt::app
