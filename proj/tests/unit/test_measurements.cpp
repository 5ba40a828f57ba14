#include <doctest.h>

#include <sstream>

#include "../oracles/frozen_values.hpp"
#include "helpers.hpp"
#include "ltvatt/errors.hpp"
#include "ltvatt/measurements.hpp"
#include "ltvatt/sensor_log.hpp"

using namespace ltvatt;
using namespace testing;

namespace {
// The defining scalar of a channel evaluated without the Kronecker form.
double direct_scalar(const Vec3& a, const Mat3& r, const Vec3& b) { return a.dot(r.transpose() * b); }
}  // namespace

TEST_CASE("kron_row layout") {
  Row9 expected = Row9::Zero();
  expected(0) = 1.0;
  CHECK(kron_row(Vec3::UnitX(), Vec3::UnitX()) == expected);
  const Row9 row = kron_row(vector_of(oracle::kKronA), vector_of(oracle::kKronB));
  CHECK((row.transpose() - vector_of(oracle::kKronRow)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kron_row reproduces a^T R^T b and the norm identity") {
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a = random_vec(2.0);
    const Vec3 b = random_vec(5.0);
    const Mat3 r = random_rotation();
    const Row9 row = kron_row(a, b);
    REQUIRE(std::abs(row.dot(vec_transpose(r)) - direct_scalar(a, r, b)) < 1e-12 * (1.0 + a.norm() * b.norm()));
    REQUIRE(std::abs(row.norm() - a.norm() * b.norm()) < 1e-12 * (1.0 + a.norm() * b.norm()));
  }
}

TEST_CASE("tilt identity: e3^T R^T e3 = cos of the roll angle") {
  const double theta = 0.83;
  CHECK(kron_row(Vec3::UnitZ(), Vec3::UnitZ()).dot(vec_transpose(exp_so3(Vec3(theta, 0, 0)))) ==
        doctest::Approx(std::cos(theta)).epsilon(1e-15));
  const ScalarChannel tilt = tilt_channel(1e-4, 50.0);
  CHECK(evaluate_channel(tilt, Mat3::Identity(), 0.0).y == doctest::Approx(1.0));
  CHECK(evaluate_channel(tilt, exp_so3(Vec3(std::numbers::pi / 6, 0, 0)), 0.0).y ==
        doctest::Approx(std::cos(std::numbers::pi / 6)));
  CHECK(std::abs(evaluate_channel(tilt, exp_so3(Vec3(0, std::numbers::pi / 2, 0)), 0.0).y) < 1e-15);
}

TEST_CASE("build_output_matrix") {
  CHECK_THROWS_WITH_AS(build_output_matrix(std::span<const ChannelSample>{}), "no active channels",
                       std::invalid_argument);
  const std::vector<ChannelSample> one{{Vec3::UnitX(), Vec3::UnitX()}};
  CHECK(build_output_matrix(one) == kron_row(Vec3::UnitX(), Vec3::UnitX()));

  const Vec3 m(1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0));
  const auto triad = vector_channels("mag", VectorProvider::constant(m), std::array{1, 2, 3}, 0.01, 100.0);
  REQUIRE(triad.size() == 3);
  std::vector<ChannelSample> samples;
  for (const auto& ch : triad) samples.push_back({ch.a(0.0), ch.b(0.0)});
  const OutputMatrix c = build_output_matrix(samples);
  for (int i = 0; i < 3; ++i) CHECK(c.row(i) == kron_row(Vec3::Unit(i), m));

  // Every row against the per-channel scalar, in declaration order.
  for (int trial = 0; trial < 1000; ++trial) {
    const Mat3 r = random_rotation();
    std::vector<ChannelSample> mixed;
    for (int k = 0; k < 7; ++k) mixed.push_back({random_vec(), random_vec(3.0)});
    const VecX y = build_output_matrix(mixed) * vec_transpose(r);
    for (std::size_t k = 0; k < mixed.size(); ++k) {
      REQUIRE(std::abs(y(static_cast<Eigen::Index>(k)) - direct_scalar(mixed[k].a, r, mixed[k].b)) < 1e-12 * 10);
    }
  }
}

TEST_CASE("vector_channels selects body axes") {
  const auto provider = VectorProvider::constant(Vec3(0, 0, -9.81));
  CHECK(vector_channels("acc", provider, std::array{1, 2, 3}, 0.001, 1000.0).size() == 3);
  const auto partial = vector_channels("acc", provider, std::array{1, 3}, 0.001, 1000.0);
  REQUIRE(partial.size() == 2);
  CHECK(partial[0].a(0.0) == Vec3::UnitX());
  CHECK(partial[1].a(0.0) == Vec3::UnitZ());
  CHECK(partial[1].id == "acc_3");
  const auto single = vector_channels("mag", provider, std::array{2}, 0.01, 100.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].id == "mag_2");
  CHECK_THROWS_AS(vector_channels("acc", provider, std::span<const int>{}, 0.001, 1000.0), std::invalid_argument);
  CHECK_THROWS_AS(vector_channels("acc", provider, std::array{4}, 0.001, 1000.0), std::invalid_argument);
}

TEST_CASE("landmark height constraint") {
  CHECK_THROWS_AS(landmark_measurement(Vec3::Zero(), 1.0, 0.0), std::invalid_argument);
  const ScalarMeasurement aligned = landmark_measurement(Vec3(0, 0, 5), 5.0, 0.0);
  CHECK(kron_row(aligned.a, aligned.b).dot(vec_transpose(Mat3::Identity())) == doctest::Approx(5.0));
  CHECK(aligned.y == 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = random_rotation();
    const Vec3 p_a = random_vec(10.0);
    Vec3 p_b = random_vec(10.0);
    if (i % 4 == 0) p_b.z() = p_a.z();  // equal elevation gives y = 0 for any attitude
    const Vec3 body = r.transpose() * (p_a - p_b);
    const ScalarMeasurement m = landmark_measurement(body, (p_a - p_b).z(), 0.0);
    REQUIRE(std::abs(kron_row(m.a, m.b).dot(vec_transpose(r)) - m.y) < 1e-11);
    if (i % 4 == 0) REQUIRE(m.y == 0.0);
  }
}

TEST_CASE("pitot channel") {
  std::vector<std::string> warnings;
  const ScalarChannel unit = pitot_channel(Vec3::UnitX(), VectorProvider::constant(Vec3(10, 0, 0)), 0.01, 50.0,
                                           &warnings);
  CHECK(warnings.empty());
  CHECK(evaluate_channel(unit, Mat3::Identity(), 0.0).y == doctest::Approx(10.0));
  const ScalarChannel still = pitot_channel(Vec3::UnitY(), VectorProvider::constant(Vec3::Zero()), 0.01, 50.0);
  const ScalarMeasurement zero = evaluate_channel(still, random_rotation(), 0.0);
  CHECK(zero.y == 0.0);
  CHECK(kron_row(zero.a, zero.b).isZero(0.0));

  const ScalarChannel scaled = pitot_channel(Vec3(2, 0, 0), VectorProvider::constant(Vec3(3, 1, 0)), 0.01, 50.0,
                                             &warnings);
  CHECK(warnings.size() == 1);
  CHECK(scaled.a(0.0).norm() == doctest::Approx(1.0));

  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = random_rotation();
    const Vec3 d = random_vec().normalized();
    const Vec3 v = random_vec(20.0);
    const ScalarChannel ch = pitot_channel(d, VectorProvider::constant(v), 0.0, 10.0);
    REQUIRE(std::abs(evaluate_channel(ch, r, 0.0).y - d.dot(r.transpose() * v)) < 1e-11);
  }
}

TEST_CASE("cross-product augmentation is consistent for any attitude") {
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = random_rotation();
    const Vec3 r1 = random_vec(3.0);
    const Vec3 r2 = random_vec(3.0);
    const auto ms = cross_product_measurements(r1, r2, r.transpose() * r1, r.transpose() * r2, 0.0);
    REQUIRE(ms.size() == 3);
    for (const auto& m : ms) REQUIRE(std::abs(kron_row(m.a, m.b).dot(vec_transpose(r)) - m.y) < 1e-11);
  }
}

TEST_CASE("vector providers") {
  const auto sampled = VectorProvider::sampled({0.0, 1.0, 2.0}, {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()});
  CHECK(sampled(-1.0) == Vec3::UnitX());
  CHECK(sampled(0.5) == Vec3::UnitX());
  CHECK(sampled(1.0) == Vec3::UnitY());
  CHECK(sampled(7.0) == Vec3::UnitZ());
  CHECK(VectorProvider::constant(Vec3::UnitY()).is_constant());
  CHECK_FALSE(sampled.is_constant());
  CHECK_THROWS_AS(VectorProvider::sampled({1.0, 0.0}, {Vec3::Zero(), Vec3::Zero()}), std::invalid_argument);
}

TEST_CASE("sensor log round trip and diagnostics") {
  std::vector<ScalarMeasurement> records{gyro_record(0.0, Vec3(0.1, -0.2, 0.3)),
                                         {"acc_1", 0.0, -0.123456789012345, Vec3::UnitX(), Vec3(0, 0, -9.81)},
                                         gyro_record(0.001, Vec3(0.1, -0.2, 0.3))};
  std::stringstream ss;
  write_sensor_log(ss, records, {0xabcdefULL, 42});
  const std::string text = ss.str();
  CHECK(text.rfind("# ltvatt " + std::string(kToolVersion) + " config_hash=", 0) == 0);
  CHECK(text.find("seed=42") != std::string::npos);
  const auto back = read_sensor_log(ss);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].channel_id == records[i].channel_id);
    CHECK(back[i].t == records[i].t);
    CHECK(back[i].y == records[i].y);  // shortest round-trip formatting is exact
    CHECK(back[i].a == records[i].a);
    CHECK(back[i].b == records[i].b);
  }

  std::istringstream missing_header("0,gyro,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_sensor_log(missing_header), DataError);
  std::istringstream bad_row(std::string(kSensorLogHeader) + "\n0,gyro,0,0,0,0,0,0,0\n0.001,acc_1,abc,1,0,0,0,0,1\n");
  try {
    read_sensor_log(bad_row);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::vector<TruthRecord> truth{{0.0, exp_so3(Vec3(0.1, 0.2, 0.3)), Vec3(1, 2, 3)}};
  std::stringstream ts;
  write_truth_log(ts, truth, {1, 2});
  const auto tb = read_truth_log(ts);
  REQUIRE(tb.size() == 1);
  CHECK(tb[0].rotation == truth[0].rotation);
  CHECK(tb[0].omega == truth[0].omega);
}
