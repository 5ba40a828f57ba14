#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltvatt/types.hpp"

namespace ltvatt {

/// Row (b^T (x) a^T) so that kron_row(a, b) * vec_transpose(R) == a^T R^T b.
template <typename DerivedA, typename DerivedB>
Row9T<typename DerivedA::Scalar> kron_row(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  Row9T<typename DerivedA::Scalar> row;
  for (int j = 0; j < 3; ++j) {
    row.template segment<3>(3 * j) = b(j) * a.transpose();
  }
  return row;
}

/// Time-dependent 3-vector: constant, zero-order-hold samples, or a closed form.
class VectorProvider {
 public:
  VectorProvider();  // constant zero

  static VectorProvider constant(const Vec3& value);
  static VectorProvider function(std::function<Vec3(double)> fn);
  // Holds each sample until the next timestamp; clamps outside the range.
  static VectorProvider sampled(std::vector<double> times, std::vector<Vec3> values);

  Vec3 operator()(double t) const;
  bool is_constant() const { return !fn_; }

 private:
  Vec3 constant_ = Vec3::Zero();
  std::function<Vec3(double)> fn_;
};

enum class ChannelKind { vector_axis, tilt, landmark, pitot, cross_product };

struct ScalarChannel {
  std::string id;
  ChannelKind kind = ChannelKind::vector_axis;
  VectorProvider a;  // body side
  VectorProvider b;  // inertial side
  double noise_variance = 0.0;
  double rate_hz = 1.0;
};

/// One evaluated scalar observation y = a^T R^T b at time t.
struct ScalarMeasurement {
  std::string channel_id;
  double t = 0.0;
  double y = 0.0;
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
};

struct ChannelSample {
  Vec3 a;
  Vec3 b;
};

/// Stacks kron_row per sample in input order. Throws std::invalid_argument
/// ("no active channels") on empty input.
OutputMatrix build_output_matrix(std::span<const ChannelSample> channels);
OutputMatrix build_output_matrix(std::span<const ScalarMeasurement> measurements);

/// One channel per selected axis i in {1,2,3}: a = e_i, b = r_inertial.
/// Ids are "<prefix>_<i>".
std::vector<ScalarChannel> vector_channels(std::string_view prefix, const VectorProvider& r_inertial,
                                           std::span<const int> axes, double variance, double rate_hz);

/// cos(tilt) = h / r = e3^T R^T e3.
ScalarChannel tilt_channel(double variance, double rate_hz, std::string id = "tilt");

/// Height-difference constraint between two landmarks seen in the body frame:
/// (l_i^B - l_j^B)^T R^T e3 = e3^T (p_i - p_j). Throws on a zero body difference.
ScalarMeasurement landmark_measurement(const Vec3& delta_body, double delta_height, double t,
                                       std::string id = "landmark");

/// Pitot probe along body direction d against inertial velocity v(t).
/// A non-unit d is normalized and a warning is appended to `warnings`.
ScalarChannel pitot_channel(const Vec3& d, VectorProvider velocity, double variance, double rate_hz,
                            std::vector<std::string>* warnings = nullptr, std::string id = "pitot");

/// Virtual triad from two full vector measurements: b = r1^I x r2^I, y = r1^B x r2^B.
std::vector<ScalarMeasurement> cross_product_measurements(const Vec3& r1_inertial, const Vec3& r2_inertial,
                                                          const Vec3& r1_body, const Vec3& r2_body, double t,
                                                          std::string_view prefix = "cross");

/// Evaluate a channel at t against a known rotation (noise-free).
ScalarMeasurement evaluate_channel(const ScalarChannel& channel, const Mat3& rotation, double t);

}  // namespace ltvatt
