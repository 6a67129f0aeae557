#include "ognn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ognn/special.hpp"

namespace ognn::quad {

void implicit_ql(std::vector<double>& d, std::vector<double> offdiag, Matrix& z) {
  const std::size_t n = d.size();
  if (n == 0) throw std::invalid_argument("implicit_ql: empty matrix");
  if (offdiag.size() + 1 != n) throw std::invalid_argument("implicit_ql: offdiag must have m - 1 entries");
  if (z.cols() != n) throw std::invalid_argument("implicit_ql: z must have m columns");

  std::vector<double> e(std::move(offdiag));
  e.push_back(0.0);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const std::size_t max_sweeps = 50 * n;
  std::size_t sweeps = 0;

  for (std::size_t l = 0; l < n; ++l) {
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m == l) break;
      if (++sweeps > max_sweeps)
        throw ConvergenceError("implicit QL did not converge within " + std::to_string(max_sweeps) +
                               " iterations");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double bb = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * bb;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - bb;
        for (std::size_t k = 0; k < z.rows(); ++k) {
          f = z(k, i + 1);
          z(k, i + 1) = s * z(k, i) + c * f;
          z(k, i) = c * z(k, i) - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (true);
  }
}

void sort_eigenpairs(std::vector<double>& eigenvalues, Matrix& z) {
  const std::size_t n = eigenvalues.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return eigenvalues[i] < eigenvalues[j]; });
  std::vector<double> sorted(n);
  Matrix zs(z.rows(), n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = eigenvalues[order[k]];
    for (std::size_t r = 0; r < z.rows(); ++r) zs(r, k) = z(r, order[k]);
  }
  eigenvalues = std::move(sorted);
  z = std::move(zs);
}

TridiagEigen tridiag_eig_symmetric(std::span<const double> diag, std::span<const double> offdiag) {
  const std::size_t m = diag.size();
  if (m == 0) throw std::invalid_argument("tridiag_eig_symmetric: need m >= 1");
  if (offdiag.size() + 1 != m) throw std::invalid_argument("tridiag_eig_symmetric: offdiag must have m - 1 entries");
  std::vector<double> d(diag.begin(), diag.end());
  Matrix first(1, m);
  first(0, 0) = 1.0;
  implicit_ql(d, std::vector<double>(offdiag.begin(), offdiag.end()), first);
  sort_eigenpairs(d, first);
  TridiagEigen out;
  out.eigenvalues = std::move(d);
  out.first_components.assign(first.flat().begin(), first.flat().end());
  return out;
}

double jacobi_weight_mass(double a, double b) {
  return std::exp((a + b + 1.0) * std::numbers::ln2 + special::log_beta(a + 1.0, b + 1.0));
}

QuadRule gauss_jacobi(std::size_t m, double a, double b) {
  if (m == 0) throw std::invalid_argument("gauss_jacobi: need m >= 1");
  if (!(a > -1.0) || !(b > -1.0))
    throw std::invalid_argument("gauss_jacobi: weight exponents must exceed -1 (a = " + std::to_string(a) +
                                ", b = " + std::to_string(b) + ")");

  // Recurrence coefficients of the monic Jacobi polynomials.
  std::vector<double> diag(m), offdiag(m - 1);
  const double ab = a + b;
  diag[0] = (b - a) / (ab + 2.0);
  for (std::size_t k = 1; k < m; ++k) {
    const double dk = static_cast<double>(k);
    const double s = 2.0 * dk + ab;
    diag[k] = (b * b - a * a) / (s * (s + 2.0));
    double beta;
    if (k == 1)
      beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    else
      beta = 4.0 * dk * (dk + a) * (dk + b) * (dk + ab) / (s * s * (s + 1.0) * (s - 1.0));
    offdiag[k - 1] = std::sqrt(beta);
  }

  const TridiagEigen eig = tridiag_eig_symmetric(diag, offdiag);
  const double mass = jacobi_weight_mass(a, b);
  QuadRule rule;
  rule.a = a;
  rule.b = b;
  rule.nodes = eig.eigenvalues;
  rule.weights.resize(m);
  for (std::size_t i = 0; i < m; ++i) rule.weights[i] = mass * eig.first_components[i] * eig.first_components[i];
  return rule;
}

double weighted_inner_product(const std::function<double(double)>& f, const std::function<double(double)>& g,
                              const QuadRule& rule) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]) * g(rule.nodes[i]);
  return s;
}

}  // namespace ognn::quad
