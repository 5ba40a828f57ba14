#include "ltvatt/sim.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ltvatt/errors.hpp"
#include "ltvatt/so3.hpp"

namespace ltvatt {

Vec3 HarmonicVector::operator()(double t) const {
  return offset + amplitude.cwiseProduct((frequency * t + phase).array().sin().matrix());
}

HarmonicVector reference_omega() {
  HarmonicVector h;
  h.amplitude = Vec3(1.0, 0.7, 0.5);
  h.frequency = Vec3(0.3, 0.2, 0.1);
  h.phase = Vec3(0.0, std::numbers::pi, std::numbers::pi / 3.0);
  return h;
}

TrajectoryProfile reference_profile(double duration, double imu_rate_hz) {
  TrajectoryProfile p;
  p.omega = reference_omega();
  p.initial_rotation = exp_so3(Vec3(0.0, std::numbers::pi / 2.0, 0.0));
  p.duration = duration;
  p.imu_rate_hz = imu_rate_hz;
  return p;
}

std::vector<TruthRecord> integrate_truth(const TrajectoryProfile& profile) {
  if (!(profile.duration > 0.0) || !(profile.imu_rate_hz > 0.0)) {
    throw ConfigError("trajectory duration and imu rate must be positive");
  }
  const auto n = static_cast<std::size_t>(std::llround(profile.duration * profile.imu_rate_hz));
  if (n == 0) throw ConfigError("trajectory shorter than one IMU period");
  const double tau = 1.0 / profile.imu_rate_hz;
  std::vector<TruthRecord> out(n);
  Mat3 r = profile.initial_rotation;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * tau;
    const Vec3 w = profile.omega(t);
    out[k] = {t, r, w};
    r = project_to_so3(r * exp_so3((w * tau).eval())).rotation;
  }
  return out;
}

TruthTable make_truth_table(std::span<const TruthRecord> truth, double rate_hz) {
  TruthTable table;
  table.rate_hz = rate_hz;
  table.t0 = truth.empty() ? 0.0 : truth.front().t;
  table.rotations.reserve(truth.size());
  for (const auto& r : truth) table.rotations.push_back(r.rotation);
  return table;
}

Vec3 accelerometer_reference() { return Vec3(0.0, 0.0, -kGravity); }
Vec3 magnetometer_reference() { return Vec3(1.0, 0.0, 1.0) / std::numbers::sqrt2; }

SensorSuite reference_case(int case_number) {
  SensorSpec acc;
  acc.name = "acc";
  acc.reference = VectorProvider::constant(accelerometer_reference());
  acc.rate_hz = 1000.0;
  acc.variance = 0.001;
  SensorSpec mag;
  mag.name = "mag";
  mag.reference = VectorProvider::constant(magnetometer_reference());
  mag.rate_hz = 100.0;
  mag.variance = 0.01;
  switch (case_number) {
    case 1: break;
    case 2:
      acc.axes = {1, 2};
      mag.axes = {2};
      break;
    case 3:
      acc.axes = {3};
      mag.axes = {1, 3};
      break;
    default: throw ConfigError("reference case must be 1, 2 or 3");
  }
  SensorSuite suite;
  suite.label = "case" + std::to_string(case_number);
  suite.gyro_cov = 0.001 * Mat3::Identity();
  suite.sensors = {acc, mag};
  return suite;
}

std::vector<ScalarChannel> suite_channels(const SensorSuite& suite, const RotationFn& rotation) {
  std::vector<ScalarChannel> out;
  for (const auto& s : suite.sensors) {
    switch (s.kind) {
      case SensorKind::vector: {
        auto chans = vector_channels(s.name, s.reference, s.axes, s.variance, s.rate_hz);
        out.insert(out.end(), chans.begin(), chans.end());
        break;
      }
      case SensorKind::tilt: out.push_back(tilt_channel(s.variance, s.rate_hz, s.name)); break;
      case SensorKind::pitot:
        out.push_back(pitot_channel(s.probe_direction, s.reference, s.variance, s.rate_hz, nullptr, s.name));
        break;
      case SensorKind::landmark: {
        if (!rotation) throw std::invalid_argument("landmark channels need the rotation history");
        ScalarChannel ch;
        ch.id = s.name;
        ch.kind = ChannelKind::landmark;
        const Vec3 dp = s.landmark_a - s.landmark_b;
        ch.a = VectorProvider::function([rotation, dp](double t) { return Vec3(rotation(t).transpose() * dp); });
        ch.b = VectorProvider::constant(Vec3::UnitZ());
        ch.noise_variance = s.variance;
        ch.rate_hz = s.rate_hz;
        out.push_back(std::move(ch));
        break;
      }
    }
  }
  return out;
}

std::map<std::string, ChannelTuning, std::less<>> suite_tuning(const SensorSuite& suite) {
  std::map<std::string, ChannelTuning, std::less<>> out;
  for (const auto& s : suite.sensors) {
    if (s.kind == SensorKind::vector) {
      for (int axis : s.axes) out[s.name + "_" + std::to_string(axis)] = {s.variance, s.rate_hz};
    } else {
      out[s.name] = {s.variance, s.rate_hz};
    }
  }
  return out;
}

namespace {

Mat3 covariance_sqrt(const Mat3& cov) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (cov + cov.transpose()));
  const Vec3 root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

std::size_t decimation(double imu_rate, double rate, const std::string& name) {
  if (!(rate > 0.0) || rate > imu_rate) throw ConfigError("sensor '" + name + "': rate must be in (0, imu rate]");
  const double ratio = imu_rate / rate;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ConfigError("sensor '" + name + "': rate must divide the IMU rate");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

std::vector<ScalarMeasurement> synthesize_measurements(std::span<const TruthRecord> truth, const SensorSuite& suite,
                                                       double imu_rate_hz, std::uint64_t noise_seed) {
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Mat3 gyro_sqrt = covariance_sqrt(suite.gyro_cov);

  std::vector<std::size_t> every;
  for (const auto& s : suite.sensors) {
    every.push_back(decimation(imu_rate_hz, s.rate_hz, s.name));
    if (s.variance < 0.0) throw ConfigError("sensor '" + s.name + "': variance must be nonnegative");
  }

  std::vector<ScalarMeasurement> out;
  out.reserve(truth.size() * 4);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const TruthRecord& tr = truth[k];
    const Vec3 n(normal(rng), normal(rng), normal(rng));
    out.push_back(gyro_record(tr.t, tr.omega + gyro_sqrt * n));
    for (std::size_t si = 0; si < suite.sensors.size(); ++si) {
      if (k % every[si] != 0) continue;
      const SensorSpec& s = suite.sensors[si];
      const double sd = std::sqrt(s.variance);
      switch (s.kind) {
        case SensorKind::vector: {
          const Vec3 r_inertial = s.reference(tr.t);
          const Vec3 body = tr.rotation.transpose() * r_inertial;
          for (int axis : s.axes) {
            out.push_back({s.name + "_" + std::to_string(axis), tr.t, body(axis - 1) + sd * normal(rng),
                           Vec3::Unit(axis - 1), r_inertial});
          }
          break;
        }
        case SensorKind::tilt:
          out.push_back({s.name, tr.t, tr.rotation(2, 2) + sd * normal(rng), Vec3::UnitZ(), Vec3::UnitZ()});
          break;
        case SensorKind::pitot: {
          const Vec3 d = s.probe_direction.normalized();
          const Vec3 v = s.reference(tr.t);
          out.push_back({s.name, tr.t, d.dot(tr.rotation.transpose() * v) + sd * normal(rng), d, v});
          break;
        }
        case SensorKind::landmark: {
          const Vec3 dp = s.landmark_a - s.landmark_b;
          Vec3 body = tr.rotation.transpose() * dp;
          for (int i = 0; i < 3; ++i) body(i) += sd * normal(rng);
          if (body.norm() > 0.0) out.push_back(landmark_measurement(body, dp.z(), tr.t, s.name));
          break;
        }
      }
    }
  }
  return out;
}

double sigma_for_mean_abs_error(double mean_abs) { return mean_abs * std::sqrt(std::numbers::pi / 2.0); }

Mat3 random_initial_estimate(const Mat3& true_rotation0, double sigma, std::mt19937_64& rng) {
  if (sigma < 0.0) throw std::invalid_argument("dispersion must be nonnegative");
  if (sigma == 0.0) return true_rotation0;
  std::normal_distribution<double> normal(0.0, sigma);
  Vec3 e;
  for (int i = 0; i < 3; ++i) e(i) = normal(rng);
  return true_rotation0 * exp_so3(e);
}

}  // namespace ltvatt
