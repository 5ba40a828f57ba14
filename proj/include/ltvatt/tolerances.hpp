#pragma once

// Numerical thresholds shared by every module.
namespace ltvatt::tol {

// R^T R = I and det R = 1 checks (Frobenius / absolute).
inline constexpr double kRotation = 1e-9;
// Below this angle the Rodrigues coefficients switch to their Taylor series.
inline constexpr double kSmallAngle = 1e-6;
// sigma_min < kRankRatio * sigma_max marks a rank-deficient projection input.
inline constexpr double kRankRatio = 1e-12;
// Relative gap under which two singular values count as equal.
inline constexpr double kSingularGap = 1e-12;
// Innovation matrix C P C^T + Q^-1 is rejected above this condition number.
inline constexpr double kInnovationCondition = 1e14;
// Symmetry check on covariance-like matrices.
inline constexpr double kSymmetry = 1e-9;
// Unit-norm check for probe directions.
inline constexpr double kUnitDirection = 1e-9;
// Gramian spectra may dip this far below zero from rounding.
inline constexpr double kSpectrumFloor = -1e-12;

}  // namespace ltvatt::tol
