#pragma once

#include <cstdint>

#include "ognn/train.hpp"

namespace ognn::verify {

inline constexpr double kOrthonormalityTol = 1e-8;
inline constexpr double kNormTol = 1e-8;
inline constexpr double kGradientTol = 1e-4;
inline constexpr double kRegularizerTol = 1e-8;
inline constexpr double kFdStep = 1e-5;

/// |x - y| / max(|x|, |y|, 1e-3): relative error with an absolute floor of
/// 1e-7 at tolerance 1e-4.
double fd_relative_error(double analytic, double numeric);

/// Self-check of one basis against the Gauss-Jacobi oracle (K + 1 nodes):
/// orthonormality, closed-form norms, norm gradients and dual tangents
/// against central differences, and sum alpha^2 against the quadrature norm
/// of a random filter.
struct BasisVerification {
  int K = 0;
  double a = 0.0;
  double b = 0.0;
  double orthonormality_defect = 0.0;  // max |<P*_i, P*_j> - delta_ij|
  double norm_rel_error = 0.0;         // max over i of closed form vs quadrature
  double norm_grad_error = 0.0;        // max fd_relative_error of norm_sq_grad
  double dual_error = 0.0;             // max fd_relative_error of basis tangents
  double regularizer_gap = 0.0;        // max |sum alpha^2 - <g, g>| over random alpha

  bool passed() const;
};

BasisVerification verify_basis(int K, double a, double b, std::uint64_t seed, std::size_t points = 20);

train::RunReport verify_experiment(const train::ExperimentConfig& cfg);

}  // namespace ognn::verify
