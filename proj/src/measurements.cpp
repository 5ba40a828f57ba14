#include "ltvatt/measurements.hpp"

#include <algorithm>
#include <stdexcept>

#include "ltvatt/so3.hpp"
#include "ltvatt/tolerances.hpp"

namespace ltvatt {

VectorProvider::VectorProvider() = default;

VectorProvider VectorProvider::constant(const Vec3& value) {
  VectorProvider p;
  p.constant_ = value;
  return p;
}

VectorProvider VectorProvider::function(std::function<Vec3(double)> fn) {
  VectorProvider p;
  p.fn_ = std::move(fn);
  return p;
}

VectorProvider VectorProvider::sampled(std::vector<double> times, std::vector<Vec3> values) {
  if (times.empty() || times.size() != values.size()) {
    throw std::invalid_argument("sampled provider needs matching, nonempty time/value series");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw std::invalid_argument("sampled provider times must be nondecreasing");
  }
  auto shared_t = std::make_shared<const std::vector<double>>(std::move(times));
  auto shared_v = std::make_shared<const std::vector<Vec3>>(std::move(values));
  return function([shared_t, shared_v](double t) {
    const auto& ts = *shared_t;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t idx = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    return (*shared_v)[idx];
  });
}

Vec3 VectorProvider::operator()(double t) const { return fn_ ? fn_(t) : constant_; }

OutputMatrix build_output_matrix(std::span<const ChannelSample> channels) {
  if (channels.empty()) throw std::invalid_argument("no active channels");
  OutputMatrix c(static_cast<Eigen::Index>(channels.size()), 9);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    c.row(static_cast<Eigen::Index>(i)) = kron_row(channels[i].a, channels[i].b);
  }
  return c;
}

OutputMatrix build_output_matrix(std::span<const ScalarMeasurement> measurements) {
  if (measurements.empty()) throw std::invalid_argument("no active channels");
  OutputMatrix c(static_cast<Eigen::Index>(measurements.size()), 9);
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    c.row(static_cast<Eigen::Index>(i)) = kron_row(measurements[i].a, measurements[i].b);
  }
  return c;
}

std::vector<ScalarChannel> vector_channels(std::string_view prefix, const VectorProvider& r_inertial,
                                           std::span<const int> axes, double variance, double rate_hz) {
  if (axes.empty()) throw std::invalid_argument("vector channel set needs at least one axis");
  if (variance < 0.0 || !(rate_hz > 0.0)) throw std::invalid_argument("invalid variance or rate");
  std::vector<ScalarChannel> out;
  out.reserve(axes.size());
  for (int axis : axes) {
    if (axis < 1 || axis > 3) throw std::invalid_argument("axis index must be 1, 2 or 3");
    ScalarChannel ch;
    ch.id = std::string(prefix) + "_" + std::to_string(axis);
    ch.kind = ChannelKind::vector_axis;
    ch.a = VectorProvider::constant(Vec3::Unit(axis - 1));
    ch.b = r_inertial;
    ch.noise_variance = variance;
    ch.rate_hz = rate_hz;
    out.push_back(std::move(ch));
  }
  return out;
}

ScalarChannel tilt_channel(double variance, double rate_hz, std::string id) {
  ScalarChannel ch;
  ch.id = std::move(id);
  ch.kind = ChannelKind::tilt;
  ch.a = VectorProvider::constant(Vec3::UnitZ());
  ch.b = VectorProvider::constant(Vec3::UnitZ());
  ch.noise_variance = variance;
  ch.rate_hz = rate_hz;
  return ch;
}

ScalarMeasurement landmark_measurement(const Vec3& delta_body, double delta_height, double t, std::string id) {
  if (!(delta_body.norm() > 0.0)) {
    throw std::invalid_argument("landmark pair has zero body-frame difference");
  }
  ScalarMeasurement m;
  m.channel_id = std::move(id);
  m.t = t;
  m.y = delta_height;
  m.a = delta_body;
  m.b = Vec3::UnitZ();
  return m;
}

ScalarChannel pitot_channel(const Vec3& d, VectorProvider velocity, double variance, double rate_hz,
                            std::vector<std::string>* warnings, std::string id) {
  const double n = d.norm();
  if (!(n > 0.0)) throw std::invalid_argument("pitot direction must be nonzero");
  ScalarChannel ch;
  ch.id = std::move(id);
  ch.kind = ChannelKind::pitot;
  Vec3 dir = d;
  if (std::abs(n - 1.0) > tol::kUnitDirection) {
    dir /= n;
    if (warnings) warnings->push_back("pitot direction normalized (norm was " + std::to_string(n) + ")");
  }
  ch.a = VectorProvider::constant(dir);
  ch.b = std::move(velocity);
  ch.noise_variance = variance;
  ch.rate_hz = rate_hz;
  return ch;
}

std::vector<ScalarMeasurement> cross_product_measurements(const Vec3& r1_inertial, const Vec3& r2_inertial,
                                                          const Vec3& r1_body, const Vec3& r2_body, double t,
                                                          std::string_view prefix) {
  const Vec3 b = r1_inertial.cross(r2_inertial);
  const Vec3 y = r1_body.cross(r2_body);
  std::vector<ScalarMeasurement> out(3);
  for (int i = 0; i < 3; ++i) {
    out[static_cast<std::size_t>(i)] = {std::string(prefix) + "_" + std::to_string(i + 1), t, y(i),
                                        Vec3::Unit(i), b};
  }
  return out;
}

ScalarMeasurement evaluate_channel(const ScalarChannel& channel, const Mat3& rotation, double t) {
  ScalarMeasurement m;
  m.channel_id = channel.id;
  m.t = t;
  m.a = channel.a(t);
  m.b = channel.b(t);
  m.y = kron_row(m.a, m.b).dot(vec_transpose(rotation));
  return m;
}

}  // namespace ltvatt
