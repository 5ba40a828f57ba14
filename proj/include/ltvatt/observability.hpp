#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ltvatt/measurements.hpp"
#include "ltvatt/types.hpp"

namespace ltvatt {

using RotationFn = std::function<Mat3(double)>;
using OmegaFn = std::function<Vec3(double)>;

enum class Verdict { observable, marginal, unobservable };
std::string_view to_string(Verdict v);

/// observable: min_eig >= mu; marginal: [0.1 mu, mu); unobservable below.
Verdict classify(double min_eig, double mu);

inline double default_mu(double delta) { return 1e-3 * delta; }

struct GramianReport {
  double t0 = 0.0;
  double t1 = 0.0;
  Mat9 W = Mat9::Zero();
  Vec9 eigenvalues = Vec9::Zero();  // ascending
  double min_eig = 0.0;
  double mu = 0.0;
  Verdict verdict = Verdict::unobservable;
  std::vector<Vec9> null_directions;  // eigenvectors with eigenvalue < mu
};

struct PEReport {
  double t0 = 0.0;
  double t1 = 0.0;
  Mat3 G = Mat3::Zero();
  Vec3 eigenvalues = Vec3::Zero();  // ascending
  double min_eig = 0.0;
  double mu = 0.0;
  Verdict verdict = Verdict::unobservable;
};

/// Trapezoid integral over [t0, t0 + delta] of sum_i u_i u_i^T with
/// u_i = b_i (x) R a_i. n_steps >= 10 intervals.
GramianReport observability_gramian(const RotationFn& rotation, std::span<const ScalarChannel> channels, double t0,
                             double delta, int n_steps, std::optional<double> mu = std::nullopt);

/// Integrand of observability_gramian at a single instant.
Mat9 gramian_integrand(const Mat3& rotation, std::span<const ScalarChannel> channels, double t);

/// Checks sum_i (b_i (x) R a_i)(b_i (x) R a_i)^T == sum_j (r_j r_j^T) (x) I3 at
/// n_steps + 1 instants; channels must come as consecutive complete triads
/// (a = e1, e2, e3 with a shared b). Returns the max elementwise discrepancy.
double gramian_equivalence_check(const RotationFn& rotation, std::span<const ScalarChannel> channels, double t0,
                                 double delta, int n_steps);

/// Trapezoid integral of sum_j r_j r_j^T.
PEReport excitation_gramian(std::span<const VectorProvider> inertial_vectors, double t0, double delta,
                             int n_steps, std::optional<double> mu = std::nullopt);

/// Integrates Phi' = A(t) Phi from s to t with RK4 at `step` and compares with
/// T(t)^T T(s), T = I3 (x) R, where R is propagated from rotation_s by an
/// independent RK4 run at step / 4. Returns the max absolute discrepancy.
double transition_matrix_check(const OmegaFn& omega, const Mat3& rotation_s, double s, double t, double step);

/// Inertial vectors of consecutive complete triads; empty if the channel list
/// is not made of complete triads.
std::optional<std::vector<VectorProvider>> triad_references(std::span<const ScalarChannel> channels);

}  // namespace ltvatt
