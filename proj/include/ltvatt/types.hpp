#pragma once

#include <Eigen/Core>

namespace ltvatt {

template <typename Scalar> using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3T = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Vec9T = Eigen::Matrix<Scalar, 9, 1>;
template <typename Scalar> using Row9T = Eigen::Matrix<Scalar, 1, 9>;
template <typename Scalar> using Mat9T = Eigen::Matrix<Scalar, 9, 9>;
template <typename Scalar> using Mat93T = Eigen::Matrix<Scalar, 9, 3>;
// q x 9 stacked output matrix C(t); row order is channel declaration order.
template <typename Scalar> using OutputMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, 9>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Vec9 = Vec9T<double>;
using Row9 = Row9T<double>;
using Mat9 = Mat9T<double>;
using Mat93 = Mat93T<double>;
using OutputMatrix = OutputMatrixT<double>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

}  // namespace ltvatt
