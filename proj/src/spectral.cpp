#include "ognn/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ognn/quadrature.hpp"

namespace ognn::spectral {

namespace {

// Householder reduction of the symmetric matrix held in z to tridiagonal form;
// on return z holds the orthogonal transform, d the diagonal and e the
// sub-diagonal (e[0] unused).
void householder_tridiagonalize(Matrix& z, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = z.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (std::size_t k = 0; k < i; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (std::size_t k = 0; k < i; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (std::size_t k = j + 1; k < i; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j < i; ++j) {
          f = z(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (std::size_t k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += z(i, k) * z(k, j);
        for (std::size_t k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

}  // namespace

EigenPair dense_sym_eig(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 0 || m.cols() != n) throw std::invalid_argument("dense_sym_eig: need a non-empty square matrix");
  if (n > kMaxDenseSize)
    throw InputError("dense_sym_eig: n = " + std::to_string(n) + " exceeds the oracle cap of " +
                     std::to_string(kMaxDenseSize));
  double norm = 0.0, defect = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      norm = std::max(norm, std::abs(m(i, j)));
      defect = std::max(defect, std::abs(m(i, j) - m(j, i)));
    }
  if (defect > 1e-10 * std::max(1.0, norm))
    throw std::invalid_argument("dense_sym_eig: matrix is not symmetric (defect " + std::to_string(defect) + ")");

  EigenPair out;
  out.eigenvectors = m;
  std::vector<double> e;
  if (n == 1) {
    out.eigenvalues = {m(0, 0)};
    out.eigenvectors = Matrix::identity(1);
    return out;
  }
  householder_tridiagonalize(out.eigenvectors, out.eigenvalues, e);
  quad::implicit_ql(out.eigenvalues, std::vector<double>(e.begin() + 1, e.end()), out.eigenvectors);
  quad::sort_eigenpairs(out.eigenvalues, out.eigenvectors);
  return out;
}

double target_filter(FilterKind kind, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 2.0))
    throw std::domain_error("target_filter: lambda must lie in [0, 2], got " + std::to_string(lambda));
  switch (kind) {
    case FilterKind::kLow:
      return std::exp(-10.0 * lambda * lambda);
    case FilterKind::kHigh:
      return 1.0 - std::exp(-10.0 * lambda * lambda);
    case FilterKind::kBand:
      return std::exp(-10.0 * (lambda - 1.0) * (lambda - 1.0));
    case FilterKind::kReject:
      return 1.0 - std::exp(-10.0 * (lambda - 1.0) * (lambda - 1.0));
    case FilterKind::kComb:
      return std::abs(std::sin(std::numbers::pi * lambda));
  }
  throw std::logic_error("unknown filter kind");
}

std::string_view filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::kLow: return "LOW";
    case FilterKind::kHigh: return "HIGH";
    case FilterKind::kBand: return "BAND";
    case FilterKind::kReject: return "REJECT";
    case FilterKind::kComb: return "COMB";
  }
  return "?";
}

std::string_view filter_formula(FilterKind kind) {
  switch (kind) {
    case FilterKind::kLow: return "exp(-10 l^2)";
    case FilterKind::kHigh: return "1 - exp(-10 l^2)";
    case FilterKind::kBand: return "exp(-10 (l - 1)^2)";
    case FilterKind::kReject: return "1 - exp(-10 (l - 1)^2)";
    case FilterKind::kComb: return "|sin(pi l)|";
  }
  return "?";
}

FilterKind parse_filter_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "low") return FilterKind::kLow;
  if (s == "high") return FilterKind::kHigh;
  if (s == "band") return FilterKind::kBand;
  if (s == "reject") return FilterKind::kReject;
  if (s == "comb" || s == "sin-reject") return FilterKind::kComb;
  throw ConfigError("unknown filter kind '" + std::string(name) + "'");
}

GraphSignal apply_spectral(const EigenPair& eig, const std::function<double(double)>& f, const GraphSignal& x) {
  const Matrix& u = eig.eigenvectors;
  const std::size_t n = u.rows(), c = x.cols();
  if (x.rows() != n) throw std::invalid_argument("apply_spectral: signal row count mismatch");
  // coeffs = diag(f) U^T x
  Matrix coeffs(n, c);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double uik = u(i, k);
      for (std::size_t j = 0; j < c; ++j) coeffs(k, j) += uik * x(i, j);
    }
    const double fk = f(eig.eigenvalues[k]);
    for (std::size_t j = 0; j < c; ++j) coeffs(k, j) *= fk;
  }
  GraphSignal y(n, c);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double uik = u(i, k);
      for (std::size_t j = 0; j < c; ++j) y(i, j) += uik * coeffs(k, j);
    }
  return y;
}

EigenPair laplacian_eig(const graph::Graph& g, bool add_self_loops) {
  if (g.n > kMaxDenseSize)
    throw InputError("graph with " + std::to_string(g.n) + " nodes exceeds the dense eigensolver cap of " +
                     std::to_string(kMaxDenseSize));
  const Matrix p = graph::propagation_matrix(g, add_self_loops).to_dense();
  Matrix lap(g.n, g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) lap(i, j) = (i == j ? 1.0 : 0.0) - p(i, j);
  return dense_sym_eig(lap);
}

GraphSignal apply_exact_filter(const graph::Graph& g, const std::function<double(double)>& response,
                               const GraphSignal& x, bool add_self_loops) {
  const EigenPair eig = laplacian_eig(g, add_self_loops);
  return apply_spectral(eig, [&](double lam) { return response(std::clamp(lam, 0.0, 2.0)); }, x);
}

GraphSignal apply_exact_filter(const graph::Graph& g, FilterKind kind, const GraphSignal& x, bool add_self_loops) {
  return apply_exact_filter(g, [kind](double lam) { return target_filter(kind, lam); }, x, add_self_loops);
}

}  // namespace ognn::spectral
