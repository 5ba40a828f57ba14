#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ltvatt/tolerances.hpp"
#include "ltvatt/types.hpp"

namespace ltvatt {

/// Skew-symmetric matrix with skew(v) * w == v.cross(w).
template <typename Derived>
Mat3T<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Mat3T<Scalar> s;
  s << Scalar(0), -v(2), v(1),
       v(2), Scalar(0), -v(0),
       -v(1), v(0), Scalar(0);
  return s;
}

/// Rodrigues exponential exp([v]x). Uses second-order Taylor coefficients
/// for |v| < tol::kSmallAngle.
template <typename Derived>
Mat3T<typename Derived::Scalar> exp_so3(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  using std::cos;
  using std::sin;
  const Scalar theta2 = v.squaredNorm();
  const Scalar theta = std::sqrt(theta2);
  Scalar c1;  // sin(t)/t
  Scalar c2;  // (1 - cos(t))/t^2
  if (theta < Scalar(tol::kSmallAngle)) {
    c1 = Scalar(1) - theta2 / Scalar(6);
    c2 = Scalar(0.5) - theta2 / Scalar(24);
  } else {
    c1 = sin(theta) / theta;
    c2 = (Scalar(1) - cos(theta)) / theta2;
  }
  const Mat3T<Scalar> k = skew(v);
  return Mat3T<Scalar>::Identity() + c1 * k + c2 * (k * k);
}

/// x = vec(R^T): block j (entries 3j..3j+2) is row j of R.
template <typename Derived>
Vec9T<typename Derived::Scalar> vec_transpose(const Eigen::MatrixBase<Derived>& r) {
  using Scalar = typename Derived::Scalar;
  Vec9T<Scalar> x;
  for (int j = 0; j < 3; ++j) {
    x.template segment<3>(3 * j) = r.row(j).transpose();
  }
  return x;
}

/// Inverse of vec_transpose on arbitrary 3x3 matrices: (vec^-1(x))^T.
/// The result is not necessarily orthonormal.
template <typename Derived>
Mat3T<typename Derived::Scalar> unvec_to_rotation_candidate(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Mat3T<Scalar> b;
  for (int j = 0; j < 3; ++j) {
    b.row(j) = x.template segment<3>(3 * j).transpose();
  }
  return b;
}

template <typename Scalar>
struct ProjectionT {
  Mat3T<Scalar> rotation;
  Vec3T<Scalar> singular_values;
  // Two smallest singular values tie while the determinant flip is active.
  bool ambiguous = false;
  // rank(B) < 3; the rotation completes the dominant singular subspace.
  bool degenerate = false;
};
using Projection = ProjectionT<double>;

/// Frobenius-nearest rotation: B = U S V^T, R = U diag(1, 1, det(U V^T)) V^T.
template <typename Derived>
ProjectionT<typename Derived::Scalar> project_to_so3(const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  ProjectionT<Scalar> out;
  const Mat3T<Scalar> m = b;
  Eigen::JacobiSVD<Mat3T<Scalar>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const Scalar s_max = out.singular_values(0);
  const Scalar s_mid = out.singular_values(1);
  const Scalar s_min = out.singular_values(2);
  if (!(s_max > Scalar(0))) {
    out.rotation.setIdentity();
    out.degenerate = true;
    return out;
  }
  out.degenerate = s_min < Scalar(tol::kRankRatio) * s_max;
  const Mat3T<Scalar>& u = svd.matrixU();
  const Mat3T<Scalar>& v = svd.matrixV();
  const Scalar d = (u * v.transpose()).determinant() < Scalar(0) ? Scalar(-1) : Scalar(1);
  out.ambiguous = d < Scalar(0) && (s_mid - s_min) <= Scalar(tol::kSingularGap) * s_max;
  out.rotation = u * Eigen::DiagonalMatrix<Scalar, 3>(Scalar(1), Scalar(1), d) * v.transpose();
  return out;
}

/// Geodesic distance in [0, pi]: the rotation angle of E = R^T R_hat.
/// atan2 of the sine (from the antisymmetric part) and cosine (from the
/// trace) keeps full relative precision near 0, where arccos of the trace
/// term bottoms out at about 1.5e-8 rad.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar attitude_error_angle(const Eigen::MatrixBase<DerivedA>& r,
                                               const Eigen::MatrixBase<DerivedB>& r_hat) {
  using Scalar = typename DerivedA::Scalar;
  const Mat3T<Scalar> e = r.transpose() * r_hat;
  const Scalar c = (e.trace() - Scalar(1)) / Scalar(2);
  const Eigen::Matrix<Scalar, 3, 1> w(e(2, 1) - e(1, 2), e(0, 2) - e(2, 0), e(1, 0) - e(0, 1));
  return std::atan2(w.norm() / Scalar(2), c);
}

template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& r,
                 typename Derived::Scalar tolerance = typename Derived::Scalar(tol::kRotation)) {
  using Scalar = typename Derived::Scalar;
  if (!r.allFinite()) return false;
  const Scalar ortho = (r.transpose() * r - Mat3T<Scalar>::Identity()).norm();
  return ortho <= tolerance && std::abs(r.determinant() - Scalar(1)) <= tolerance;
}

}  // namespace ltvatt
