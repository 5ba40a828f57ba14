#pragma once

#include <functional>
#include <vector>

#include "ltvatt/filter.hpp"
#include "ltvatt/measurements.hpp"
#include "ltvatt/types.hpp"

namespace ltvatt {

/// Noise-free continuous-time filter problem. Truth x = vec(R^T) is integrated
/// alongside the estimate so that y = C(t) x exactly.
struct ContinuousSetup {
  std::function<Vec3(double)> omega;
  std::vector<ScalarChannel> channels;
  VecX q_weights;  // diagonal of Q(t), one per channel
  Mat9 m = Mat9::Zero();
  GainMode mode = GainMode::riccati;
  Mat3 true_rotation0 = Mat3::Identity();
  Vec9 x_hat0 = Vec9::Zero();
  Mat9 p0 = Mat9::Identity();
};

struct ContinuousSample {
  double t = 0.0;
  Vec9 x;
  Vec9 x_hat;
  Mat9 P;
  double lyapunov = 0.0;  // (x - x_hat)^T P^-1 (x - x_hat)
};

/// RK4 on (x, x_hat, P) with step h over [t0, t1]:
///   x'     = A x
///   x_hat' = A x_hat + P C^T Q (y - C x_hat)
///   P'     = A P + P A^T - P C^T Q C P + M      (riccati)
/// In fixed-gain mode P stays at p0 and the gain is C^T Q.
std::vector<ContinuousSample> integrate_continuous_filter(const ContinuousSetup& setup, double t0, double t1,
                                                          double h, std::size_t record_every = 1);

}  // namespace ltvatt
