#include <iostream>

#include <CLI11.hpp>

#include "ltvatt/app/commands.hpp"
#include "ltvatt/app/config.hpp"
#include "ltvatt/errors.hpp"
#include "ltvatt/sensor_log.hpp"

namespace {

void add_common(CLI::App* cmd, ltvatt::app::CommandOptions& o) {
  cmd->add_option("-c,--config", o.config, "Scenario or multi-case JSON config")->required();
  cmd->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Override the root seed");
}

void add_filter_flags(CLI::App* cmd, ltvatt::app::CommandOptions& o, std::string& mode) {
  cmd->add_option("--mode", mode, "Gain law: riccati or fixed_gain")->check(CLI::IsMember({"riccati", "fixed_gain"}));
  cmd->add_flag("--no-reset", o.no_reset, "Skip the SO(3) reset of the state after each step");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ltvatt::app;
  CLI::App app{"Attitude estimation from scalar measurements with a linear time-varying Kalman filter"};
  app.set_version_flag("--version", std::string(ltvatt::kToolVersion));
  app.require_subcommand(1);

  CommandOptions o;
  std::string mode;

  auto* sim = app.add_subcommand("simulate", "Synthesize a sensor log and truth trajectory");
  add_common(sim, o);

  auto* est = app.add_subcommand("estimate", "Run the discrete filter on a sensor log");
  add_common(est, o);
  add_filter_flags(est, o, mode);
  est->add_option("--log", o.log, "Sensor log CSV")->required();
  est->add_option("--truth", o.truth, "Truth CSV; adds err_rad to the output");

  auto* obs = app.add_subcommand("check-observability", "Windowed observability Gramian and verdicts");
  obs->add_option("-c,--config,--schedule", o.config, "Scenario config holding the sensor schedule")->required();
  obs->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  obs->add_option("--seed", o.seed, "Override the root seed");
  obs->add_option("--omega", o.omega_source, "Rotation source: 'profile' or a truth CSV")->capture_default_str();
  obs->add_option("--delta", o.delta, "Window length in seconds")->check(CLI::PositiveNumber);
  obs->add_option("--mu", o.mu, "Observability threshold (default 1e-3 * delta)")->check(CLI::PositiveNumber);

  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo trials with mean and percentile curves");
  add_common(mc, o);
  add_filter_flags(mc, o, mode);
  mc->add_option("-j,--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  mc->add_option("--runs", o.runs, "Override the number of runs")->check(CLI::PositiveNumber);
  mc->add_flag("--per-run", o.per_run, "Also write every run's error trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (!mode.empty()) o.mode = parse_gain_mode(mode);

  const std::string name = app.get_subcommands().front()->get_name();
  return run_command(name, o, std::cout, std::cerr);
}
