#include "ltvatt/observability.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "ltvatt/filter.hpp"
#include "ltvatt/so3.hpp"

namespace ltvatt {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::observable: return "observable";
    case Verdict::marginal: return "marginal";
    case Verdict::unobservable: return "unobservable";
  }
  return "unknown";
}

Verdict classify(double min_eig, double mu) {
  if (min_eig >= mu) return Verdict::observable;
  if (min_eig >= 0.1 * mu) return Verdict::marginal;
  return Verdict::unobservable;
}

namespace {

void check_window(double delta, int n_steps) {
  if (!(delta > 0.0)) throw std::invalid_argument("window length must be positive");
  if (n_steps < 10) throw std::invalid_argument("at least 10 quadrature intervals required");
}

template <typename Integrand, typename Matrix>
Matrix trapezoid(const Integrand& f, double t0, double delta, int n_steps, Matrix zero) {
  const double h = delta / n_steps;
  Matrix acc = zero;
  for (int k = 0; k <= n_steps; ++k) {
    const double w = (k == 0 || k == n_steps) ? 0.5 : 1.0;
    acc += w * f(t0 + k * h);
  }
  return acc * h;
}

}  // namespace

Mat9 gramian_integrand(const Mat3& rotation, std::span<const ScalarChannel> channels, double t) {
  Mat9 sum = Mat9::Zero();
  for (const auto& ch : channels) {
    Vec9 u;
    const Vec3 ra = rotation * ch.a(t);
    const Vec3 b = ch.b(t);
    for (int j = 0; j < 3; ++j) u.segment<3>(3 * j) = b(j) * ra;
    sum.noalias() += u * u.transpose();
  }
  return sum;
}

GramianReport observability_gramian(const RotationFn& rotation, std::span<const ScalarChannel> channels, double t0,
                             double delta, int n_steps, std::optional<double> mu) {
  check_window(delta, n_steps);
  GramianReport rep;
  rep.t0 = t0;
  rep.t1 = t0 + delta;
  rep.mu = mu.value_or(default_mu(delta));
  rep.W = trapezoid([&](double t) { return gramian_integrand(rotation(t), channels, t); }, t0, delta, n_steps,
                    Mat9::Zero().eval());
  rep.W = 0.5 * (rep.W + rep.W.transpose());
  Eigen::SelfAdjointEigenSolver<Mat9> eig(rep.W);
  rep.eigenvalues = eig.eigenvalues();
  rep.min_eig = rep.eigenvalues(0);
  rep.verdict = classify(rep.min_eig, rep.mu);
  for (int i = 0; i < 9; ++i) {
    if (rep.eigenvalues(i) < rep.mu) rep.null_directions.push_back(eig.eigenvectors().col(i));
  }
  return rep;
}

std::optional<std::vector<VectorProvider>> triad_references(std::span<const ScalarChannel> channels) {
  if (channels.empty() || channels.size() % 3 != 0) return std::nullopt;
  std::vector<VectorProvider> refs;
  for (std::size_t j = 0; j < channels.size(); j += 3) {
    for (int i = 0; i < 3; ++i) {
      const auto& ch = channels[j + static_cast<std::size_t>(i)];
      if (!ch.a.is_constant() || (ch.a(0.0) - Vec3::Unit(i)).norm() != 0.0) return std::nullopt;
    }
    refs.push_back(channels[j].b);
  }
  return refs;
}

double gramian_equivalence_check(const RotationFn& rotation, std::span<const ScalarChannel> channels, double t0,
                                 double delta, int n_steps) {
  check_window(delta, n_steps);
  const auto refs = triad_references(channels);
  if (!refs) throw std::invalid_argument("channels do not form complete vector triads");
  // Shared b within a triad, checked at every sample instant below.
  double worst = 0.0;
  const double h = delta / n_steps;
  for (int k = 0; k <= n_steps; ++k) {
    const double t = t0 + k * h;
    for (std::size_t j = 0; j < channels.size(); j += 3) {
      const Vec3 b = channels[j].b(t);
      if ((channels[j + 1].b(t) - b).norm() != 0.0 || (channels[j + 2].b(t) - b).norm() != 0.0) {
        throw std::invalid_argument("triad channels do not share an inertial vector");
      }
    }
    const Mat9 lhs = gramian_integrand(rotation(t), channels, t);
    Mat3 g = Mat3::Zero();
    for (const auto& r : *refs) {
      const Vec3 v = r(t);
      g += v * v.transpose();
    }
    Mat9 rhs = Mat9::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rhs.block<3, 3>(3 * i, 3 * j) = g(i, j) * Mat3::Identity();
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

PEReport excitation_gramian(std::span<const VectorProvider> inertial_vectors, double t0, double delta,
                             int n_steps, std::optional<double> mu) {
  check_window(delta, n_steps);
  if (inertial_vectors.empty()) throw std::invalid_argument("at least one inertial vector required");
  PEReport rep;
  rep.t0 = t0;
  rep.t1 = t0 + delta;
  rep.mu = mu.value_or(default_mu(delta));
  rep.G = trapezoid(
      [&](double t) {
        Mat3 s = Mat3::Zero();
        for (const auto& r : inertial_vectors) {
          const Vec3 v = r(t);
          s += v * v.transpose();
        }
        return s;
      },
      t0, delta, n_steps, Mat3::Zero().eval());
  rep.G = 0.5 * (rep.G + rep.G.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(rep.G, Eigen::EigenvaluesOnly);
  rep.eigenvalues = eig.eigenvalues();
  rep.min_eig = rep.eigenvalues(0);
  rep.verdict = classify(rep.min_eig, rep.mu);
  return rep;
}

double transition_matrix_check(const OmegaFn& omega, const Mat3& rotation_s, double s, double t, double step) {
  if (t < s) throw std::invalid_argument("transition check requires s <= t");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (t == s) return 0.0;

  auto rk4 = [](auto f, auto y, double a, double b, double h) {
    const auto n = static_cast<long long>(std::ceil((b - a) / h - 1e-9));
    const double hh = (b - a) / static_cast<double>(n);
    for (long long k = 0; k < n; ++k) {
      const double tk = a + static_cast<double>(k) * hh;
      const auto k1 = f(tk, y);
      const auto k2 = f(tk + 0.5 * hh, (y + 0.5 * hh * k1).eval());
      const auto k3 = f(tk + 0.5 * hh, (y + 0.5 * hh * k2).eval());
      const auto k4 = f(tk + hh, (y + hh * k3).eval());
      y = (y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
    }
    return y;
  };

  const Mat9 phi = rk4([&](double tk, const Mat9& p) -> Mat9 { return a_matrix(omega(tk)) * p; },
                       Mat9::Identity().eval(), s, t, step);
  const Mat3 r_t = rk4([&](double tk, const Mat3& r) -> Mat3 { return r * skew(omega(tk)); }, rotation_s, s, t,
                       step / 4.0);
  const Mat3 rel = r_t.transpose() * rotation_s;
  Mat9 expected = Mat9::Zero();
  for (int j = 0; j < 3; ++j) expected.block<3, 3>(3 * j, 3 * j) = rel;
  return (phi - expected).cwiseAbs().maxCoeff();
}

}  // namespace ltvatt
