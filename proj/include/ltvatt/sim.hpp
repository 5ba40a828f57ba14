#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ltvatt/discrete_filter.hpp"
#include "ltvatt/measurements.hpp"
#include "ltvatt/observability.hpp"
#include "ltvatt/sensor_log.hpp"
#include "ltvatt/types.hpp"

namespace ltvatt {

inline constexpr double kGravity = 9.81;

/// Per-component offset + amplitude * sin(frequency * t + phase).
struct HarmonicVector {
  Vec3 offset = Vec3::Zero();
  Vec3 amplitude = Vec3::Zero();
  Vec3 frequency = Vec3::Zero();  // rad/s
  Vec3 phase = Vec3::Zero();

  Vec3 operator()(double t) const;
};

/// omega(t) = [sin(0.3t), 0.7 sin(0.2t + pi), 0.5 sin(0.1t + pi/3)] rad/s.
HarmonicVector reference_omega();

struct TrajectoryProfile {
  std::function<Vec3(double)> omega;
  Mat3 initial_rotation = Mat3::Identity();
  double duration = 60.0;
  double imu_rate_hz = 1000.0;
};

/// Reference scenario: reference_omega() with R(0) = exp([pi e2]x / 2).
TrajectoryProfile reference_profile(double duration = 60.0, double imu_rate_hz = 1000.0);

/// ZOH truth on the IMU grid: R_{k+1} = R_k exp([omega(t_k) tau]x), re-projected
/// onto SO(3) every step. Produces round(duration * imu_rate) samples from t = 0.
std::vector<TruthRecord> integrate_truth(const TrajectoryProfile& profile);

TruthTable make_truth_table(std::span<const TruthRecord> truth, double rate_hz);

enum class SensorKind { vector, tilt, pitot, landmark };

struct SensorSpec {
  std::string name;
  SensorKind kind = SensorKind::vector;
  VectorProvider reference;          // vector: r^I(t); pitot: v^I(t)
  std::vector<int> axes{1, 2, 3};    // vector sensors only
  double rate_hz = 100.0;
  double variance = 0.0;             // per scalar (per axis for landmark body vectors)
  Vec3 probe_direction = Vec3::UnitX();  // pitot
  Vec3 landmark_a = Vec3::Zero();        // landmark inertial positions
  Vec3 landmark_b = Vec3::Zero();
};

struct SensorSuite {
  std::string label;
  Mat3 gyro_cov = 0.001 * Mat3::Identity();
  std::vector<SensorSpec> sensors;
};

Vec3 accelerometer_reference();  // -g e3
Vec3 magnetometer_reference();   // [1/sqrt2, 0, 1/sqrt2]

/// Sensor layouts of the three partial-measurement scenarios (1, 2 or 3).
SensorSuite reference_case(int case_number);

/// Scalar channels of a suite. Landmark channels need the rotation history
/// (their body-side vector is R(t)^T (p_a - p_b)); pass it when available.
std::vector<ScalarChannel> suite_channels(const SensorSuite& suite, const RotationFn& rotation = {});

/// Channel tunings keyed by channel id for FilterConfig::channels.
std::map<std::string, ChannelTuning, std::less<>> suite_tuning(const SensorSuite& suite);

/// Gyro plus every sensor channel sampled from truth at its rate with additive
/// Gaussian noise; time-ordered, gyro first within a timestamp. Sensor rates
/// must divide the IMU rate.
std::vector<ScalarMeasurement> synthesize_measurements(std::span<const TruthRecord> truth, const SensorSuite& suite,
                                                       double imu_rate_hz, std::uint64_t noise_seed);

/// sigma such that E|e_i| = mean_abs for e_i ~ N(0, sigma^2): sigma = m sqrt(pi/2).
double sigma_for_mean_abs_error(double mean_abs);

/// R_hat0 = R_true0 exp([e]x), e ~ N(0, sigma^2 I3).
Mat3 random_initial_estimate(const Mat3& true_rotation0, double sigma, std::mt19937_64& rng);

}  // namespace ltvatt
