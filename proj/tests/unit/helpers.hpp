#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "ltvatt/so3.hpp"
#include "ltvatt/types.hpp"

namespace testing {

using ltvatt::Mat3;
using ltvatt::Mat9;
using ltvatt::Vec3;
using ltvatt::Vec9;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eed1234ULL);
  return engine;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Vec3 random_vec(double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return Vec3(n(rng()), n(rng()), n(rng()));
}

// Uniform direction times a uniform angle in [0, max_angle].
inline Vec3 random_axis_angle(double max_angle = std::numbers::pi) {
  Vec3 v = random_vec();
  while (v.norm() < 1e-6) v = random_vec();
  return v.normalized() * uniform(0.0, max_angle);
}

inline Mat3 random_rotation() { return ltvatt::exp_so3(random_axis_angle()); }

template <std::size_t N>
Eigen::Matrix<double, static_cast<int>(std::sqrt(double(N))), static_cast<int>(std::sqrt(double(N))), Eigen::RowMajor>
row_major(const std::array<double, N>& values) {
  constexpr int n = static_cast<int>(std::sqrt(double(N)));
  return Eigen::Map<const Eigen::Matrix<double, n, n, Eigen::RowMajor>>(values.data());
}

template <std::size_t N>
Eigen::Matrix<double, static_cast<int>(N), 1> vector_of(const std::array<double, N>& values) {
  return Eigen::Map<const Eigen::Matrix<double, static_cast<int>(N), 1>>(values.data());
}

}  // namespace testing
