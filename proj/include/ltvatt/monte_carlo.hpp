#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ltvatt/discrete_filter.hpp"
#include "ltvatt/sim.hpp"

namespace ltvatt {

struct MonteCarloSpec {
  int n_runs = 100;
  // Mean absolute per-axis initial error; sigma follows sigma_for_mean_abs_error.
  double mean_axis_error_rad = 22.5 * 3.14159265358979323846 / 180.0;
  std::optional<double> sigma_rad;  // overrides mean_axis_error_rad
  std::uint64_t seed = 1;
  std::vector<double> percentiles{5.0, 95.0};
  unsigned jobs = 1;
  bool noise_enabled = true;
  double converged_final_rad = 5.0 * 3.14159265358979323846 / 180.0;
  double converged_ratio = 0.1;  // final error must also be below this fraction of the initial error
  double final_window_s = 1.0;   // final error is the mean over this trailing window
};

struct RunResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::vector<double> error;  // rad, one per IMU step
  double initial_error = 0.0;
  double final_error = 0.0;  // mean over MonteCarloSpec::final_window_s
  std::optional<double> convergence_time;  // first time after which error stays below converged_final_rad
  bool converged = false;
  bool diverged = false;  // final error > pi / 2
};

struct MonteCarloResult {
  std::string label;
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> percentile_levels;
  std::vector<std::vector<double>> percentile_curves;  // [level][time]
  std::vector<RunResult> runs;
  std::size_t converged_count = 0;
  std::size_t diverged_count = 0;
  std::vector<std::string> warnings;
};

/// Deterministic per-trial seed (splitmix64 of root and index).
std::uint64_t sub_seed(std::uint64_t root, std::uint64_t index);

/// Linear-interpolation percentile (p in [0, 100]); reorders `values`.
double percentile(std::vector<double>& values, double p);

/// Runs n independent trials on a shared truth trajectory. Each trial draws its
/// initial estimate and measurement noise from its own sub-seed, so results do
/// not depend on `jobs`.
MonteCarloResult run_monte_carlo(const MonteCarloSpec& spec, const SensorSuite& suite,
                                 const TrajectoryProfile& profile, const FilterConfig& base_config);

struct ModeComparison {
  double riccati_error_integral = 0.0;  // rad * s
  double fixed_gain_error_integral = 0.0;
  double riccati_final = 0.0;
  double fixed_gain_final = 0.0;
  std::vector<double> t;
  std::vector<double> riccati_error;
  std::vector<double> fixed_gain_error;
};

/// Same measurements and initial estimate through both gain laws.
ModeComparison compare_gain_modes(const SensorSuite& suite, const TrajectoryProfile& profile,
                                  const FilterConfig& base_config, const Mat3& initial_estimate,
                                  std::uint64_t noise_seed, bool noise_enabled);

}  // namespace ltvatt
