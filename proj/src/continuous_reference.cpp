#include "ltvatt/continuous_reference.hpp"

#include <cmath>
#include <stdexcept>

#include "ltvatt/so3.hpp"

namespace ltvatt {

namespace {

struct Augmented {
  Vec9 x;
  Vec9 x_hat;
  Mat9 P;

  Augmented operator+(const Augmented& o) const { return {x + o.x, x_hat + o.x_hat, P + o.P}; }
  Augmented operator*(double s) const { return {s * x, s * x_hat, s * P}; }
};

Augmented derivative(const ContinuousSetup& setup, double t, const Augmented& s) {
  const Mat9 a = a_matrix(setup.omega(t));
  const auto q = static_cast<Eigen::Index>(setup.channels.size());
  OutputMatrix c(q, 9);
  for (Eigen::Index i = 0; i < q; ++i) {
    const auto& ch = setup.channels[static_cast<std::size_t>(i)];
    c.row(i) = kron_row(ch.a(t), ch.b(t));
  }
  const VecX innovation = c * (s.x - s.x_hat);
  Augmented d;
  d.x = a * s.x;
  if (setup.mode == GainMode::riccati) {
    const Eigen::Matrix<double, 9, Eigen::Dynamic> pct = s.P * c.transpose();
    d.x_hat = a * s.x_hat + pct * setup.q_weights.cwiseProduct(innovation);
    d.P = a * s.P + s.P * a.transpose() - pct * setup.q_weights.asDiagonal() * pct.transpose() + setup.m;
  } else {
    d.x_hat = a * s.x_hat + c.transpose() * setup.q_weights.cwiseProduct(innovation);
    d.P = Mat9::Zero();
  }
  return d;
}

double lyapunov(const Augmented& s) {
  const Vec9 e = s.x - s.x_hat;
  return e.dot(s.P.ldlt().solve(e));
}

}  // namespace

std::vector<ContinuousSample> integrate_continuous_filter(const ContinuousSetup& setup, double t0, double t1,
                                                          double h, std::size_t record_every) {
  if (!(h > 0.0) || !(t1 >= t0)) throw std::invalid_argument("continuous filter: bad step or interval");
  if (setup.q_weights.size() != static_cast<Eigen::Index>(setup.channels.size())) {
    throw std::invalid_argument("continuous filter: one Q weight per channel required");
  }
  if (record_every == 0) record_every = 1;
  Augmented s{vec_transpose(setup.true_rotation0), setup.x_hat0, setup.p0};
  const auto steps = static_cast<std::size_t>(std::llround((t1 - t0) / h));
  std::vector<ContinuousSample> out;
  out.reserve(steps / record_every + 2);
  auto record = [&](double t) { out.push_back({t, s.x, s.x_hat, s.P, lyapunov(s)}); };
  record(t0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const Augmented k1 = derivative(setup, t, s);
    const Augmented k2 = derivative(setup, t + 0.5 * h, s + k1 * (0.5 * h));
    const Augmented k3 = derivative(setup, t + 0.5 * h, s + k2 * (0.5 * h));
    const Augmented k4 = derivative(setup, t + h, s + k3 * h);
    s = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    s.P = 0.5 * (s.P + s.P.transpose());
    if ((k + 1) % record_every == 0 || k + 1 == steps) record(t0 + static_cast<double>(k + 1) * h);
  }
  return out;
}

}  // namespace ltvatt
