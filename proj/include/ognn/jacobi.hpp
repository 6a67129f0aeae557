#pragma once

#include <optional>
#include <vector>

#include "ognn/common.hpp"
#include "ognn/dual.hpp"
#include "ognn/graph.hpp"

namespace ognn::jacobi {

/// Lower margin of the (a, b) feasibility box above -1, and its upper edge.
inline constexpr double kAbEpsilon = 1e-3;
inline constexpr double kAbUpper = 2.0;

/// Basis of orthonormal Jacobi polynomials P*_0..P*_K for the weight
/// (1 - x)^a (1 + x)^b on [-1, 1].
struct BasisParams {
  int K = 10;
  double a = 0.0;
  double b = 0.0;

  /// Throws std::invalid_argument unless K >= 0, a > -1 and b > -1.
  void validate() const;
  /// Clamps (a, b) into [-1 + kAbEpsilon, kAbUpper].
  void project();
};

/// Squared norm of the unnormalized P_i under the Jacobi weight. Degree 0 uses
/// 2^{a+b+1} B(a+1, b+1), which stays finite as a + b + 1 -> 0.
double norm_sq(int i, const BasisParams& p);

struct NormGrad {
  double d_a = 0.0;
  double d_b = 0.0;
};

/// Partial derivatives of norm_sq(i, p) with respect to a and b, assembled
/// from digamma terms of d ln(norm_sq).
NormGrad norm_sq_grad(int i, const BasisParams& p);

/// Coefficients of P_i = (slope * x + shift) * P_{i-1} - prev * P_{i-2}.
template <typename T>
struct RecurrenceStep {
  T slope;
  T shift;
  T prev;
};

RecurrenceStep<double> recurrence_step(int i, double a, double b);
RecurrenceStep<DualReal> recurrence_step(int i, const DualReal& a, const DualReal& b);

/// 1 / ||P_i||, with tangents in the dual overload.
double inv_norm(int i, const BasisParams& p);
DualReal inv_norm_dual(int i, const BasisParams& p);

/// Unnormalized P_0(x) .. P_K(x) from the three-term recurrence.
std::vector<double> eval_jacobi(const BasisParams& p, double x);

/// P*_0(x) .. P*_K(x). Throws std::domain_error if |x| > 1 + 1e-12.
std::vector<double> eval_orthonormal_basis(const BasisParams& p, double x);
std::vector<DualReal> eval_orthonormal_basis_dual(const BasisParams& p, double x);

/// Evaluates sum_k coeffs[k] P*_k(x).
double eval_series(const BasisParams& p, std::span<const double> coeffs, double x);

struct BasisSignals {
  std::vector<GraphSignal> values;  // B_k = P*_k(P) X
  std::vector<GraphSignal> d_a;     // dB_k/da, present in dual mode
  std::vector<GraphSignal> d_b;
};

/// Applies P*_0(P) .. P*_K(P) to X with the three-term recurrence, using only
/// sparse products with P.
BasisSignals apply_orthonormal_basis(const graph::SparseMatrix& P, const GraphSignal& X,
                                     const BasisParams& p, bool dual = false);

}  // namespace ognn::jacobi
