#include "ltvatt/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "ltvatt/errors.hpp"
#include "ltvatt/so3.hpp"

namespace ltvatt {

std::uint64_t sub_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double percentile(std::vector<double>& values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

SensorSuite without_noise(SensorSuite suite) {
  suite.gyro_cov.setZero();
  for (auto& s : suite.sensors) s.variance = 0.0;
  return suite;
}

RunResult run_trial(std::size_t index, const MonteCarloSpec& spec, const SensorSuite& noisy_suite,
                    const std::vector<TruthRecord>& truth, const TruthTable& table, const TrajectoryProfile& profile,
                    const FilterConfig& base) {
  RunResult rr;
  rr.index = index;
  rr.seed = sub_seed(spec.seed, index);
  std::mt19937_64 rng(rr.seed);
  const double sigma = spec.sigma_rad.value_or(sigma_for_mean_abs_error(spec.mean_axis_error_rad));
  FilterConfig config = base;
  config.initial_rotation = random_initial_estimate(truth.front().rotation, sigma, rng);
  config.initial_state.reset();
  const std::uint64_t noise_seed = rng();
  const auto log = synthesize_measurements(truth, noisy_suite, profile.imu_rate_hz, noise_seed);
  const FilterRun run = run_discrete_filter(log, config, &table);

  rr.error.reserve(run.samples.size());
  for (const auto& s : run.samples) rr.error.push_back(s.err_rad);
  rr.initial_error = attitude_error_angle(truth.front().rotation, config.initial_rotation);
  if (rr.error.empty()) {
    rr.final_error = rr.initial_error;
  } else {
    // Average over the trailing window so a single noisy sample does not decide convergence.
    const auto window = static_cast<std::size_t>(std::max(1.0, std::round(spec.final_window_s * profile.imu_rate_hz)));
    const std::size_t n = std::min(window, rr.error.size());
    double sum = 0.0;
    for (std::size_t k = rr.error.size() - n; k < rr.error.size(); ++k) sum += rr.error[k];
    rr.final_error = sum / static_cast<double>(n);
  }
  rr.diverged = !(rr.final_error <= std::numbers::pi / 2.0);
  rr.converged = rr.final_error < spec.converged_final_rad && rr.final_error < spec.converged_ratio * rr.initial_error;
  std::size_t last_above = rr.error.size();
  for (std::size_t k = rr.error.size(); k-- > 0;) {
    if (!(rr.error[k] < spec.converged_final_rad)) {
      last_above = k;
      break;
    }
  }
  if (last_above == rr.error.size()) {
    rr.convergence_time = run.samples.empty() ? 0.0 : run.samples.front().t;
  } else if (last_above + 1 < rr.error.size()) {
    rr.convergence_time = run.samples[last_above + 1].t;
  }
  return rr;
}

}  // namespace

MonteCarloResult run_monte_carlo(const MonteCarloSpec& spec, const SensorSuite& suite,
                                 const TrajectoryProfile& profile, const FilterConfig& base_config) {
  if (spec.n_runs < 1) throw ConfigError("montecarlo: n_runs must be >= 1");
  for (double p : spec.percentiles) {
    if (!(p > 0.0 && p < 100.0)) throw ConfigError("montecarlo: percentiles must lie in (0, 100)");
  }
  const auto truth = integrate_truth(profile);
  const TruthTable table = make_truth_table(truth, profile.imu_rate_hz);
  const SensorSuite trial_suite = spec.noise_enabled ? suite : without_noise(suite);
  FilterConfig base = base_config;
  base.imu_rate_hz = profile.imu_rate_hz;
  if (base.channels.empty()) base.channels = suite_tuning(suite);

  MonteCarloResult res;
  res.label = suite.label;
  res.runs.resize(static_cast<std::size_t>(spec.n_runs));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < res.runs.size(); i = next++) {
      res.runs[i] = run_trial(i, spec, trial_suite, truth, table, profile, base);
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(spec.n_runs)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  const std::size_t n_t = truth.size();
  res.t.reserve(n_t);
  for (const auto& tr : truth) res.t.push_back(tr.t);
  res.mean.assign(n_t, 0.0);
  res.percentile_levels = spec.percentiles;
  res.percentile_curves.assign(spec.percentiles.size(), std::vector<double>(n_t, 0.0));
  std::vector<double> column(res.runs.size());
  for (std::size_t k = 0; k < n_t; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < res.runs.size(); ++r) {
      column[r] = k < res.runs[r].error.size() ? res.runs[r].error[k] : std::numbers::pi;
      sum += column[r];
    }
    res.mean[k] = sum / static_cast<double>(column.size());
    for (std::size_t p = 0; p < spec.percentiles.size(); ++p) {
      res.percentile_curves[p][k] = percentile(column, spec.percentiles[p]);
    }
  }
  for (const auto& r : res.runs) {
    if (r.converged) ++res.converged_count;
    if (r.diverged) {
      ++res.diverged_count;
      res.warnings.push_back("run " + std::to_string(r.index) + " (seed " + std::to_string(r.seed) +
                             ") diverged: final error " + std::to_string(r.final_error) + " rad");
    }
  }
  return res;
}

ModeComparison compare_gain_modes(const SensorSuite& suite, const TrajectoryProfile& profile,
                                  const FilterConfig& base_config, const Mat3& initial_estimate,
                                  std::uint64_t noise_seed, bool noise_enabled) {
  const auto truth = integrate_truth(profile);
  const TruthTable table = make_truth_table(truth, profile.imu_rate_hz);
  const auto log =
      synthesize_measurements(truth, noise_enabled ? suite : without_noise(suite), profile.imu_rate_hz, noise_seed);
  FilterConfig config = base_config;
  config.imu_rate_hz = profile.imu_rate_hz;
  if (config.channels.empty()) config.channels = suite_tuning(suite);
  config.initial_rotation = initial_estimate;
  config.initial_state.reset();

  ModeComparison cmp;
  auto run_mode = [&](GainMode mode, std::vector<double>& err, double& integral, double& final_err) {
    config.mode = mode;
    const FilterRun run = run_discrete_filter(log, config, &table);
    err.clear();
    cmp.t.clear();
    for (const auto& s : run.samples) {
      err.push_back(s.err_rad);
      cmp.t.push_back(s.t);
    }
    integral = 0.0;
    for (std::size_t k = 1; k < err.size(); ++k) integral += 0.5 * (err[k] + err[k - 1]) * (cmp.t[k] - cmp.t[k - 1]);
    final_err = err.empty() ? 0.0 : err.back();
  };
  run_mode(GainMode::riccati, cmp.riccati_error, cmp.riccati_error_integral, cmp.riccati_final);
  run_mode(GainMode::fixed_gain, cmp.fixed_gain_error, cmp.fixed_gain_error_integral, cmp.fixed_gain_final);
  return cmp;
}

}  // namespace ltvatt
