#pragma once

#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ltvatt/errors.hpp"
#include "ltvatt/so3.hpp"
#include "ltvatt/tolerances.hpp"
#include "ltvatt/types.hpp"

namespace ltvatt {

enum class GainMode { riccati, fixed_gain };

template <typename Scalar>
struct FilterStateT {
  Vec9T<Scalar> x_hat = Vec9T<Scalar>::Zero();
  Mat9T<Scalar> P = Mat9T<Scalar>::Identity();
  double t = 0.0;
  GainMode mode = GainMode::riccati;
};
using FilterState = FilterStateT<double>;

template <typename Scalar>
using DynMatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DynVecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A(t) = -(I3 (x) [omega]x), the generator of x = vec(R^T).
template <typename Derived>
Mat9T<typename Derived::Scalar> a_matrix(const Eigen::MatrixBase<Derived>& omega) {
  using Scalar = typename Derived::Scalar;
  Mat9T<Scalar> a = Mat9T<Scalar>::Zero();
  const Mat3T<Scalar> block = -skew(omega);
  for (int j = 0; j < 3; ++j) a.template block<3, 3>(3 * j, 3 * j) = block;
  return a;
}

/// Exact ZOH transition I3 (x) exp(-[omega tau]x).
template <typename Derived>
Mat9T<typename Derived::Scalar> discrete_transition(const Eigen::MatrixBase<Derived>& omega,
                                                    typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  Mat9T<Scalar> a = Mat9T<Scalar>::Zero();
  const Mat3T<Scalar> block = exp_so3((-tau * omega).eval());
  for (int j = 0; j < 3; ++j) a.template block<3, 3>(3 * j, 3 * j) = block;
  return a;
}

template <typename Derived>
bool is_symmetric_psd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (!m.allFinite()) return false;
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(tol::kSymmetry) * scale) return false;
  Eigen::LDLT<DynMatT<Scalar>> ldlt(m);
  if (ldlt.info() != Eigen::Success) return false;
  // LDLT with pivoting keeps D's sign pattern; tiny negative pivots are rounding.
  return (ldlt.vectorD().array() >= -Scalar(1e-12) * scale).all();
}

namespace detail {

template <typename Scalar>
void symmetrize(Mat9T<Scalar>& p) {
  p = (Scalar(0.5) * (p + p.transpose())).eval();
}

template <typename Scalar>
FilterStateT<Scalar> predict_unchecked(const FilterStateT<Scalar>& state, const Vec3T<Scalar>& omega,
                                       Scalar tau, const Mat9T<Scalar>& m_k) {
  const Mat3T<Scalar> e = exp_so3((-tau * omega).eval());
  FilterStateT<Scalar> out = state;
  for (int j = 0; j < 3; ++j) {
    out.x_hat.template segment<3>(3 * j) = e * state.x_hat.template segment<3>(3 * j);
  }
  // A P A^T with A = I3 (x) E acts blockwise.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.P.template block<3, 3>(3 * i, 3 * j) =
          e * state.P.template block<3, 3>(3 * i, 3 * j) * e.transpose();
    }
  }
  out.P += m_k;
  out.t = state.t + static_cast<double>(tau);
  return out;
}

}  // namespace detail

/// Prediction: x <- A x, P <- A P A^T + M_k. Rejects tau <= 0 and non-PSD M_k.
template <typename Scalar>
FilterStateT<Scalar> predict(const FilterStateT<Scalar>& state, const Vec3T<Scalar>& omega, Scalar tau,
                             const Mat9T<Scalar>& m_k) {
  if (!(tau > Scalar(0))) throw std::invalid_argument("predict: tau must be positive");
  if (!is_symmetric_psd(m_k)) throw std::invalid_argument("predict: M_k is not symmetric positive semidefinite");
  return detail::predict_unchecked(state, omega, tau, m_k);
}

/// Riccati correction with K = P C^T (C P C^T + Q^-1)^-1. `meas_cov` is Q_k^-1.
/// Throws NumericalError when the innovation matrix is near-singular.
template <typename Scalar>
FilterStateT<Scalar> update(const FilterStateT<Scalar>& state, const OutputMatrixT<Scalar>& c,
                            const DynVecT<Scalar>& y, const DynMatT<Scalar>& meas_cov) {
  const Eigen::Index q = c.rows();
  if (y.size() != q || meas_cov.rows() != q || meas_cov.cols() != q) {
    throw std::invalid_argument("update: dimension mismatch between C, y and Q^-1");
  }
  if (q == 0) return state;
  const DynMatT<Scalar> pct = state.P * c.transpose();
  DynMatT<Scalar> s = c * pct + meas_cov;
  s = (Scalar(0.5) * (s + s.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<DynMatT<Scalar>> eig(s, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues().minCoeff();
  const Scalar hi = eig.eigenvalues().maxCoeff();
  if (!(lo > Scalar(0)) || hi / lo > Scalar(tol::kInnovationCondition)) {
    throw NumericalError("update: innovation matrix is singular or ill-conditioned");
  }
  // K^T = S^-1 (P C^T)^T
  const Eigen::Matrix<Scalar, 9, Eigen::Dynamic> k = s.llt().solve(pct.transpose()).transpose();
  FilterStateT<Scalar> out = state;
  out.x_hat += k * (y - c * state.x_hat);
  out.P = (Mat9T<Scalar>::Identity() - k * c) * state.P;
  detail::symmetrize(out.P);
  return out;
}

/// Fixed-gain correction x <- x + C^T Q (y - C x); P is left untouched.
template <typename Scalar>
FilterStateT<Scalar> fixed_gain_update(const FilterStateT<Scalar>& state, const OutputMatrixT<Scalar>& c,
                                       const DynVecT<Scalar>& y, const DynMatT<Scalar>& gain_weight) {
  const Eigen::Index q = c.rows();
  if (y.size() != q || gain_weight.rows() != q || gain_weight.cols() != q) {
    throw std::invalid_argument("fixed_gain_update: dimension mismatch");
  }
  FilterStateT<Scalar> out = state;
  if (q == 0) return out;
  out.x_hat += c.transpose() * (gain_weight * (y - c * state.x_hat));
  return out;
}

/// N(x) = -[[e1]x, [e2]x, [e3]x]^T where e_j are the 3-blocks of x.
template <typename Derived>
Mat93T<typename Derived::Scalar> noise_propagation(const Eigen::MatrixBase<Derived>& x_hat) {
  using Scalar = typename Derived::Scalar;
  Mat93T<Scalar> n;
  for (int j = 0; j < 3; ++j) {
    n.template block<3, 3>(3 * j, 0) = -skew(x_hat.template segment<3>(3 * j)).transpose();
  }
  return n;
}

/// M_k = (1 / f_imu) N Cov(n_w) N^T + m_floor * I9.
template <typename Derived>
Mat9T<typename Derived::Scalar> tune_M(const Eigen::MatrixBase<Derived>& x_hat,
                                       const Mat3T<typename Derived::Scalar>& gyro_cov,
                                       typename Derived::Scalar f_imu, typename Derived::Scalar m_floor) {
  using Scalar = typename Derived::Scalar;
  const Mat93T<Scalar> n = noise_propagation(x_hat);
  Mat9T<Scalar> m = (n * gyro_cov * n.transpose()) / f_imu;
  m.diagonal().array() += m_floor;
  detail::symmetrize(m);
  return m;
}

/// Diagonal Q_k^-1 with entries variance_i / rate_i + q_floor.
template <typename Scalar>
DynMatT<Scalar> tune_Q(std::span<const Scalar> variances, std::span<const Scalar> rates_hz, Scalar q_floor) {
  if (variances.size() != rates_hz.size()) throw std::invalid_argument("tune_Q: size mismatch");
  const auto q = static_cast<Eigen::Index>(variances.size());
  DynMatT<Scalar> out = DynMatT<Scalar>::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (!(rates_hz[idx] > Scalar(0))) throw std::invalid_argument("tune_Q: rates must be positive");
    out(i, i) = variances[idx] / rates_hz[idx] + q_floor;
    if (!(out(i, i) > Scalar(0))) throw std::invalid_argument("tune_Q: entry not positive after floor");
  }
  return out;
}

template <typename Scalar>
struct ResetResultT {
  Mat3T<Scalar> rotation;
  FilterStateT<Scalar> state;
  bool degenerate = false;
  bool ambiguous = false;
  bool reset_applied = false;
};
using ResetResult = ResetResultT<double>;

/// Reconstructs R_hat from the nearest rotation to (vec^-1(x_hat))^T and, if
/// enabled, replaces x_hat with vec(R_hat^T). P is not modified. A degenerate
/// candidate keeps the raw x_hat.
template <typename Scalar>
ResetResultT<Scalar> reconstruct_and_reset(const FilterStateT<Scalar>& state, bool reset_enabled = true) {
  ResetResultT<Scalar> out;
  const ProjectionT<Scalar> proj = project_to_so3(unvec_to_rotation_candidate(state.x_hat));
  out.rotation = proj.rotation;
  out.degenerate = proj.degenerate;
  out.ambiguous = proj.ambiguous;
  out.state = state;
  if (reset_enabled && !proj.degenerate) {
    out.state.x_hat = vec_transpose(proj.rotation);
    out.reset_applied = true;
  }
  return out;
}

}  // namespace ltvatt
