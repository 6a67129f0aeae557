#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ognn/common.hpp"

namespace ognn::quad {

/// Diagonalizes a symmetric tridiagonal matrix in place by implicit-shift QL.
/// `diag` (size m) receives the eigenvalues, unsorted. `offdiag` holds the m-1
/// sub-diagonal entries and is destroyed. The columns of `z` (rows x m) are
/// rotated along: start from I to get eigenvectors, from a single row e_1^T
/// to get only first components, or from a Householder basis to finish a
/// dense reduction. Throws ConvergenceError after 50 m sweeps.
void implicit_ql(std::vector<double>& diag, std::vector<double> offdiag, Matrix& z);

/// Sorts eigenvalues ascending, permuting the columns of z to match.
void sort_eigenpairs(std::vector<double>& eigenvalues, Matrix& z);

struct TridiagEigen {
  std::vector<double> eigenvalues;       // ascending
  std::vector<double> first_components;  // first entry of each unit eigenvector
};

TridiagEigen tridiag_eig_symmetric(std::span<const double> diag, std::span<const double> offdiag);

/// Gauss rule for the weight (1 - x)^a (1 + x)^b on [-1, 1].
struct QuadRule {
  std::vector<double> nodes;    // strictly increasing, inside (-1, 1)
  std::vector<double> weights;  // positive
  double a = 0.0;
  double b = 0.0;

  std::size_t size() const { return nodes.size(); }
};

/// 2^{a+b+1} B(a+1, b+1), the integral of the weight.
double jacobi_weight_mass(double a, double b);

/// m-point Gauss-Jacobi rule by Golub-Welsch; exact for degree <= 2m - 1.
QuadRule gauss_jacobi(std::size_t m, double a, double b);

double weighted_inner_product(const std::function<double(double)>& f, const std::function<double(double)>& g,
                              const QuadRule& rule);

}  // namespace ognn::quad
