#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltvatt/filter.hpp"
#include "ltvatt/measurements.hpp"
#include "ltvatt/types.hpp"

namespace ltvatt {

struct ChannelTuning {
  double variance = 0.0;
  double rate_hz = 1.0;
};

struct FilterConfig {
  GainMode mode = GainMode::riccati;
  double p0_scale = 1.0;
  double m_floor = 1e-9;
  double q_floor = 1e-9;
  bool reset_enabled = true;
  Mat3 gyro_cov = 0.001 * Mat3::Identity();
  double imu_rate_hz = 1000.0;
  // Fixed-gain mode: per-row weight fixed_gain / (|a|^2 |b|^2), i.e. each
  // normalized row contributes fixed_gain to C^T Q C.
  double fixed_gain = 0.1;
  std::map<std::string, ChannelTuning, std::less<>> channels;
  Mat3 initial_rotation = Mat3::Identity();
  std::optional<Vec9> initial_state;  // raw 9-vector, overrides initial_rotation
};

/// Truth rotations on a uniform grid starting at t0.
struct TruthTable {
  double t0 = 0.0;
  double rate_hz = 1.0;
  std::vector<Mat3> rotations;

  const Mat3* at(double t) const;
};

struct EstimateSample {
  double t = 0.0;
  Mat3 rotation = Mat3::Identity();
  double trace_P = 0.0;
  double err_rad = std::numeric_limits<double>::quiet_NaN();
};

struct StepInfo {
  std::size_t step = 0;
  const FilterState& state;
  const Mat3& rotation;
  std::size_t rows = 0;  // scalar rows used in this step's correction
  bool reset_applied = false;
};
using StepObserver = std::function<void(const StepInfo&)>;

struct FilterRun {
  std::vector<EstimateSample> samples;
  std::vector<std::string> warnings;
  std::size_t update_steps = 0;
  std::size_t held_imu_steps = 0;
  std::size_t skipped_resets = 0;
  bool has_truth = false;
};

/// Filter loop on the IMU grid: predict with the previous gyro sample,
/// stack every scalar record falling on the current step into one correction,
/// symmetrize P, reconstruct R_hat and reset x_hat.
///
/// Records must be time-ordered (DataError otherwise). Missing gyro samples
/// hold the last omega. Channel ids other than "gyro" must appear in
/// config.channels.
FilterRun run_discrete_filter(std::span<const ScalarMeasurement> log, const FilterConfig& config,
                              const TruthTable* truth = nullptr, const StepObserver& observer = {});

FilterState initial_filter_state(const FilterConfig& config, double t0 = 0.0);

}  // namespace ltvatt
