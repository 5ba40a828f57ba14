#include <doctest.h>

#include <memory>
#include <numbers>

#include "../oracles/frozen_values.hpp"
#include "helpers.hpp"
#include "ltvatt/observability.hpp"
#include "ltvatt/sim.hpp"

using namespace ltvatt;
using namespace testing;

namespace {

RotationFn constant_rate(const Mat3& r0, const Vec3& w) {
  return [r0, w](double t) { return Mat3(r0 * exp_so3((w * t).eval())); };
}

RotationFn zoh_truth(const TrajectoryProfile& profile) {
  auto table = std::make_shared<TruthTable>(make_truth_table(integrate_truth(profile), profile.imu_rate_hz));
  return [table](double t) {
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(std::floor(t * table->rate_hz + 1e-9)),
                                           table->rotations.size() - 1);
    return table->rotations[idx];
  };
}

std::vector<ScalarChannel> triads(std::initializer_list<Vec3> refs) {
  std::vector<ScalarChannel> out;
  int n = 0;
  for (const Vec3& r : refs) {
    auto t = vector_channels("v" + std::to_string(n++), VectorProvider::constant(r), std::array{1, 2, 3}, 0.0, 100.0);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

int rank_of(const Vec9& eigenvalues, double threshold) {
  int r = 0;
  for (int i = 0; i < 9; ++i) r += eigenvalues(i) > threshold ? 1 : 0;
  return r;
}

}  // namespace

TEST_CASE("classification thresholds") {
  CHECK(classify(1.0, 1.0) == Verdict::observable);
  CHECK(classify(0.1, 1.0) == Verdict::marginal);
  CHECK(classify(0.0999, 1.0) == Verdict::unobservable);
  CHECK(to_string(Verdict::marginal) == "marginal");
  CHECK(default_mu(5.0) == doctest::Approx(5e-3));
}

TEST_CASE("Gramian matches the adaptive-quadrature oracle") {
  std::vector<ScalarChannel> channels(3);
  const std::array<Vec3, 3> b{Vec3(0, 0, -9.81), Vec3(1, 0, 1) / std::sqrt(2.0), Vec3(0.2, 0.9, 0.1)};
  for (int i = 0; i < 3; ++i) {
    channels[i].a = VectorProvider::constant(Vec3::Unit(i));
    channels[i].b = VectorProvider::constant(b[i]);
  }
  const auto rotation =
      constant_rate(exp_so3(vector_of(oracle::kGramR0AxisAngle)), vector_of(oracle::kGramOmega));
  const GramianReport rep = observability_gramian(rotation, channels, 0.0, oracle::kGramDelta, 20000);
  const Mat9 expected = row_major(oracle::kGramRowMajor);
  CHECK((rep.W - expected).cwiseAbs().maxCoeff() < 1e-6 * expected.cwiseAbs().maxCoeff());
  const Vec9 eig = vector_of(oracle::kGramEigenvalues);
  for (int i = 0; i < 9; ++i) CHECK(rep.eigenvalues(i) == doctest::Approx(eig(i)).epsilon(1e-5));
}

TEST_CASE("partial-measurement scenario 2 has a three-dimensional null space") {
  const auto rotation = zoh_truth(reference_profile(6.0));
  const auto channels = suite_channels(reference_case(2));
  REQUIRE(channels.size() == 3);
  const GramianReport rep = observability_gramian(rotation, channels, 0.0, 5.0, 5000);
  const Vec9 eig = vector_of(oracle::kCase2Eigenvalues);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(rep.eigenvalues(i)) < 1e-9);
  for (int i = 3; i < 9; ++i) CHECK(rep.eigenvalues(i) == doctest::Approx(eig(i)).epsilon(1e-7));
  CHECK(rank_of(rep.eigenvalues, 1e-6) == 6);
  CHECK(rep.verdict == Verdict::unobservable);
  CHECK(rep.null_directions.size() == 3);
  // The missing block is row 2 of R: every null direction lives in the middle block.
  for (const Vec9& v : rep.null_directions) {
    CHECK(v.segment<3>(3).norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("two full triads need the cross-product triad to become observable") {
  const auto rotation = zoh_truth(reference_profile(20.0));
  auto channels = suite_channels(reference_case(1));
  REQUIRE(channels.size() == 6);
  const GramianReport measured = observability_gramian(rotation, channels, 0.0, 5.0, 500);
  CHECK(rank_of(measured.eigenvalues, 1e-9) == 6);
  CHECK(measured.verdict == Verdict::unobservable);

  const Vec3 completion = accelerometer_reference().cross(magnetometer_reference());
  auto extra = vector_channels("cross", VectorProvider::constant(completion), std::array{1, 2, 3}, 0.0, 100.0);
  channels.insert(channels.end(), extra.begin(), extra.end());
  for (double t0 : {0.0, 5.0, 10.0, 14.99}) {
    CHECK(observability_gramian(rotation, channels, t0, 5.0, 500).verdict == Verdict::observable);
  }
}

TEST_CASE("a single constant vector leaves six unobservable directions") {
  const auto rotation = constant_rate(Mat3::Identity(), Vec3(0.3, -0.7, 0.5));
  const auto channels = triads({Vec3(0, 0, -9.81)});
  const GramianReport rep = observability_gramian(rotation, channels, 0.0, 5.0, 1000);
  CHECK(rank_of(rep.eigenvalues, 1e-10) == 3);
  CHECK(rep.min_eig < 1e-10);
  CHECK(rep.null_directions.size() == 6);
}

TEST_CASE("three orthonormal triads give the identity integrand") {
  const auto channels = triads({Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()});
  for (int i = 0; i < 100; ++i) {
    const Mat9 g = gramian_integrand(random_rotation(), channels, 0.0);
    REQUIRE((g - Mat9::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
  // One scalar per reference (a = e_i against r_i) is not enough.
  std::vector<ScalarChannel> sparse(3);
  for (int i = 0; i < 3; ++i) {
    sparse[i].a = VectorProvider::constant(Vec3::Unit(i));
    sparse[i].b = VectorProvider::constant(Vec3::Unit(i));
  }
  const GramianReport rep = observability_gramian(constant_rate(Mat3::Identity(), Vec3::Zero()), sparse, 0.0, 1.0, 10);
  CHECK(rank_of(rep.eigenvalues, 1e-12) == 3);
}

TEST_CASE("triad Gramian equals the excitation matrix lifted by I3") {
  const auto channels = triads({Vec3(0, 0, -9.81), Vec3(1, 0, 1) / std::sqrt(2.0)});
  for (int i = 0; i < 50; ++i) {
    const double err = gramian_equivalence_check(constant_rate(random_rotation(), random_vec()), channels, 0.0,
                                                 2.0, 200);
    REQUIRE(err < 1e-12);
  }
  auto broken = channels;
  broken.pop_back();
  CHECK_THROWS_AS(gramian_equivalence_check(constant_rate(Mat3::Identity(), Vec3::Zero()), broken, 0.0, 1.0, 10),
                  std::invalid_argument);
}

TEST_CASE("excitation of a planar rotating vector") {
  const std::array providers{
      VectorProvider::function([](double t) { return Vec3(std::cos(t), std::sin(t), 0.0); })};
  const PEReport rep = excitation_gramian(providers, 0.0, 2.0 * std::numbers::pi, 20000);
  const Mat3 expected = Vec3(std::numbers::pi, std::numbers::pi, 0.0).asDiagonal();
  CHECK((rep.G - expected).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(rep.verdict == Verdict::unobservable);

  // Adding the cross product of two references completes the span.
  const Vec3 g(0, 0, -9.81);
  const Vec3 m = Vec3(1, 0, 1) / std::sqrt(2.0);
  const std::array two{VectorProvider::constant(g), VectorProvider::constant(m)};
  const std::array three{VectorProvider::constant(g), VectorProvider::constant(m),
                         VectorProvider::constant(g.cross(m))};
  CHECK(excitation_gramian(two, 0.0, 5.0, 100).min_eig < 1e-10);
  CHECK(excitation_gramian(three, 0.0, 5.0, 100).verdict == Verdict::observable);
}

TEST_CASE("transition matrix of the vectorized kinematics") {
  CHECK(transition_matrix_check(reference_omega(), reference_profile().initial_rotation, 0.0, 5.0, 1e-3) < 1e-8);
  CHECK(transition_matrix_check(reference_omega(), random_rotation(), 3.0, 4.5, 1e-3) < 1e-8);
  CHECK(transition_matrix_check(reference_omega(), Mat3::Identity(), 1.0, 1.0, 1e-3) == 0.0);
  CHECK_THROWS_AS(transition_matrix_check(reference_omega(), Mat3::Identity(), 2.0, 1.0, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("Gramian properties") {
  const auto channels = suite_channels(reference_case(3));
  for (int i = 0; i < 100; ++i) {
    const Mat3 r0 = random_rotation();
    const Vec3 w = random_vec(0.5);
    const GramianReport rep = observability_gramian(constant_rate(r0, w), channels, 0.0, 2.0, 100);
    REQUIRE(rep.W == rep.W.transpose());
    REQUIRE(rep.min_eig > tol::kSpectrumFloor * rep.eigenvalues(8));

    // Longer windows only add information.
    const GramianReport longer = observability_gramian(constant_rate(r0, w), channels, 0.0, 4.0, 200);
    REQUIRE(Eigen::SelfAdjointEigenSolver<Mat9>(longer.W - rep.W).eigenvalues().minCoeff() > -1e-9);

    // Left-multiplying the trajectory by a fixed rotation Q maps W to (I3 (x) Q) W (I3 (x) Q)^T.
    const Mat3 q = random_rotation();
    const GramianReport rotated = observability_gramian(constant_rate((q * r0).eval(), w), channels, 0.0, 2.0, 100);
    Mat9 lift = Mat9::Zero();
    for (int j = 0; j < 3; ++j) lift.block<3, 3>(3 * j, 3 * j) = q;
    REQUIRE((rotated.W - lift * rep.W * lift.transpose()).cwiseAbs().maxCoeff() < 1e-9 * rep.eigenvalues(8));
    REQUIRE((rotated.eigenvalues - rep.eigenvalues).cwiseAbs().maxCoeff() < 1e-9 * rep.eigenvalues(8));
  }
  CHECK_THROWS_AS(observability_gramian(constant_rate(Mat3::Identity(), Vec3::Zero()), channels, 0.0, 1.0, 9),
                  std::invalid_argument);
  CHECK_THROWS_AS(observability_gramian(constant_rate(Mat3::Identity(), Vec3::Zero()), channels, 0.0, 0.0, 10),
                  std::invalid_argument);
}
