#include "ltvatt/discrete_filter.hpp"

#include <cmath>

#include "ltvatt/errors.hpp"
#include "ltvatt/sensor_log.hpp"

namespace ltvatt {

const Mat3* TruthTable::at(double t) const {
  const long long idx = std::llround((t - t0) * rate_hz);
  if (idx < 0 || static_cast<std::size_t>(idx) >= rotations.size()) return nullptr;
  return &rotations[static_cast<std::size_t>(idx)];
}

FilterState initial_filter_state(const FilterConfig& config, double t0) {
  FilterState s;
  s.x_hat = config.initial_state ? *config.initial_state : vec_transpose(config.initial_rotation);
  s.P = config.p0_scale * Mat9::Identity();
  s.t = t0;
  s.mode = config.mode;
  return s;
}

FilterRun run_discrete_filter(std::span<const ScalarMeasurement> log, const FilterConfig& config,
                              const TruthTable* truth, const StepObserver& observer) {
  if (!(config.imu_rate_hz > 0.0)) throw ConfigError("imu rate must be positive");
  if (!(config.p0_scale > 0.0)) throw ConfigError("p0_scale must be positive");
  if (config.m_floor < 0.0 || config.q_floor < 0.0) throw ConfigError("floors must be nonnegative");

  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].t < log[i - 1].t) {
      throw DataError("time-reversed record at entry " + std::to_string(i + 1) + " (t=" +
                      format_double(log[i].t) + " after t=" + format_double(log[i - 1].t) + ")");
    }
  }
  const ScalarMeasurement* first_gyro = nullptr;
  for (const auto& r : log) {
    if (is_gyro(r)) {
      first_gyro = &r;
      break;
    }
  }
  if (!first_gyro) throw DataError("log has no gyro records");

  const double rate = config.imu_rate_hz;
  const double tau = 1.0 / rate;
  const double t0 = first_gyro->t;
  const std::size_t last_step = static_cast<std::size_t>(std::max(0LL, std::llround((log.back().t - t0) * rate)));

  FilterRun run;
  run.has_truth = truth != nullptr;
  std::vector<std::optional<Vec3>> gyro(last_step + 1);
  std::size_t dropped = 0;
  std::size_t duplicate_gyro = 0;
  for (const auto& r : log) {
    if (!is_gyro(r)) {
      if (config.channels.find(r.channel_id) == config.channels.end()) {
        throw DataError("channel id '" + r.channel_id + "' is not configured");
      }
      continue;
    }
    const long long k = std::llround((r.t - t0) * rate);
    if (gyro[static_cast<std::size_t>(k)]) {
      ++duplicate_gyro;
      continue;
    }
    gyro[static_cast<std::size_t>(k)] = r.a;
  }
  if (duplicate_gyro > 0) {
    run.warnings.push_back(std::to_string(duplicate_gyro) + " duplicate gyro samples ignored");
  }

  FilterState state = initial_filter_state(config, t0);
  Vec3 omega = Vec3::Zero();
  std::size_t cursor = 0;
  std::vector<const ScalarMeasurement*> rows;
  run.samples.reserve(last_step + 1);

  for (std::size_t k = 0; k <= last_step; ++k) {
    if (k > 0) {
      if (gyro[k - 1]) {
        omega = *gyro[k - 1];
      } else {
        ++run.held_imu_steps;
      }
      const Mat9 m_k = config.mode == GainMode::riccati
                           ? tune_M(state.x_hat, config.gyro_cov, rate, config.m_floor)
                           : Mat9::Zero().eval();
      state = detail::predict_unchecked(state, omega, tau, m_k);
    }
    state.t = t0 + static_cast<double>(k) * tau;

    rows.clear();
    while (cursor < log.size()) {
      const ScalarMeasurement& r = log[cursor];
      const long long bin = std::llround((r.t - t0) * rate);
      if (bin > static_cast<long long>(k)) break;
      ++cursor;
      if (is_gyro(r)) continue;
      if (bin < static_cast<long long>(k)) {
        ++dropped;
        continue;
      }
      rows.push_back(&r);
    }

    if (!rows.empty()) {
      const auto q = static_cast<Eigen::Index>(rows.size());
      OutputMatrix c(q, 9);
      VecX y(q);
      MatX weight = MatX::Zero(q, q);
      for (Eigen::Index i = 0; i < q; ++i) {
        const ScalarMeasurement& r = *rows[static_cast<std::size_t>(i)];
        c.row(i) = kron_row(r.a, r.b);
        y(i) = r.y;
        if (config.mode == GainMode::riccati) {
          const ChannelTuning& tuning = config.channels.find(r.channel_id)->second;
          weight(i, i) = tuning.variance / tuning.rate_hz + config.q_floor;
        } else {
          const double n2 = c.row(i).squaredNorm();
          weight(i, i) = n2 > 0.0 ? config.fixed_gain / n2 : 0.0;
        }
      }
      state = config.mode == GainMode::riccati ? update(state, c, y, weight) : fixed_gain_update(state, c, y, weight);
      ++run.update_steps;
    }
    detail::symmetrize(state.P);

    const ResetResult reset = reconstruct_and_reset(state, config.reset_enabled);
    if (reset.degenerate) ++run.skipped_resets;
    state = reset.state;

    EstimateSample sample;
    sample.t = state.t;
    sample.rotation = reset.rotation;
    sample.trace_P = state.P.trace();
    if (truth) {
      if (const Mat3* r = truth->at(sample.t)) sample.err_rad = attitude_error_angle(*r, reset.rotation);
    }
    run.samples.push_back(sample);
    if (observer) observer(StepInfo{k, state, reset.rotation, rows.size(), reset.reset_applied});
  }

  if (run.held_imu_steps > 0) {
    run.warnings.push_back(std::to_string(run.held_imu_steps) + " IMU samples missing; held last omega (ZOH)");
  }
  if (dropped > 0) run.warnings.push_back(std::to_string(dropped) + " records before the first gyro sample dropped");
  if (run.skipped_resets > 0) {
    run.warnings.push_back(std::to_string(run.skipped_resets) + " degenerate estimates; reset skipped");
  }
  return run;
}

}  // namespace ltvatt
