#include "ognn/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ognn/special.hpp"

namespace ognn::jacobi {

using special::digamma;
using special::log_gamma;

void BasisParams::validate() const {
  if (K < 0) throw std::invalid_argument("basis degree K must be >= 0, got " + std::to_string(K));
  if (!(a > -1.0) || !(b > -1.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("Jacobi exponents must satisfy a > -1 and b > -1, got a = " +
                                std::to_string(a) + ", b = " + std::to_string(b));
}

void BasisParams::project() {
  a = std::clamp(a, -1.0 + kAbEpsilon, kAbUpper);
  b = std::clamp(b, -1.0 + kAbEpsilon, kAbUpper);
}

namespace {

double log_norm_sq(int i, double a, double b) {
  const double head = (a + b + 1.0) * std::numbers::ln2;
  if (i == 0) return head + log_gamma(a + 1.0) + log_gamma(b + 1.0) - log_gamma(a + b + 2.0);
  const double di = i;
  return head + log_gamma(di + a + 1.0) + log_gamma(di + b + 1.0) - std::log(2.0 * di + a + b + 1.0) -
         log_gamma(di + a + b + 1.0) - log_gamma(di + 1.0);
}

NormGrad log_norm_sq_grad(int i, double a, double b) {
  if (i == 0) {
    const double common = std::numbers::ln2 - digamma(a + b + 2.0);
    return {common + digamma(a + 1.0), common + digamma(b + 1.0)};
  }
  const double di = i;
  const double common = std::numbers::ln2 - 1.0 / (2.0 * di + a + b + 1.0) - digamma(di + a + b + 1.0);
  return {common + digamma(di + a + 1.0), common + digamma(di + b + 1.0)};
}

}  // namespace

double norm_sq(int i, const BasisParams& p) {
  if (i < 0) throw std::invalid_argument("norm_sq: degree must be >= 0");
  p.validate();
  return std::exp(log_norm_sq(i, p.a, p.b));
}

NormGrad norm_sq_grad(int i, const BasisParams& p) {
  const double n2 = norm_sq(i, p);
  const NormGrad g = log_norm_sq_grad(i, p.a, p.b);
  return {n2 * g.d_a, n2 * g.d_b};
}

double inv_norm(int i, const BasisParams& p) { return 1.0 / std::sqrt(norm_sq(i, p)); }

DualReal inv_norm_dual(int i, const BasisParams& p) {
  // 1/||P_i|| = exp(-ln(norm_sq) / 2)
  const double r = inv_norm(i, p);
  const NormGrad g = log_norm_sq_grad(i, p.a, p.b);
  return {r, -0.5 * r * g.d_a, -0.5 * r * g.d_b};
}

namespace {

template <typename T>
RecurrenceStep<T> step_impl(int i, const T& a, const T& b) {
  if (i == 1) return {0.5 * a + 0.5 * b + 1.0, 0.5 * a - 0.5 * b, T(0.0)};
  const double di = i;
  const T s = 2.0 * di + a + b;  // 2i + a + b
  const T denom = 2.0 * di * (di + a + b) * (s - 2.0);
  return {(s - 1.0) * s * (s - 2.0) / denom, (s - 1.0) * (a * a - b * b) / denom,
          (di + a - 1.0) * (di + b - 1.0) * s / (di * (di + a + b) * (s - 2.0))};
}

template <typename T>
T make_param(double v, int which);

template <>
double make_param<double>(double v, int) {
  return v;
}

template <>
DualReal make_param<DualReal>(double v, int which) {
  return which == 0 ? DualReal(v, 1.0, 0.0) : DualReal(v, 0.0, 1.0);
}

template <typename T>
T inv_norm_t(int i, const BasisParams& p) {
  if constexpr (std::is_same_v<T, double>)
    return inv_norm(i, p);
  else
    return inv_norm_dual(i, p);
}

template <typename T>
std::vector<T> eval_basis(const BasisParams& p, double x, bool normalize = true) {
  p.validate();
  if (!(std::abs(x) <= 1.0 + 1e-12))
    throw std::domain_error("basis argument outside [-1, 1]: " + std::to_string(x));
  const T a = make_param<T>(p.a, 0);
  const T b = make_param<T>(p.b, 1);
  std::vector<T> raw(static_cast<std::size_t>(p.K) + 1);
  raw[0] = T(1.0);
  if (p.K >= 1) {
    const auto st = step_impl<T>(1, a, b);
    raw[1] = st.shift + st.slope * x;
  }
  for (int i = 2; i <= p.K; ++i) {
    const auto st = step_impl<T>(i, a, b);
    raw[i] = (st.slope * x + st.shift) * raw[i - 1] - st.prev * raw[i - 2];
  }
  if (normalize)
    for (int i = 0; i <= p.K; ++i) raw[i] *= inv_norm_t<T>(i, p);
  return raw;
}

}  // namespace

RecurrenceStep<double> recurrence_step(int i, double a, double b) { return step_impl<double>(i, a, b); }

RecurrenceStep<DualReal> recurrence_step(int i, const DualReal& a, const DualReal& b) {
  return step_impl<DualReal>(i, a, b);
}

std::vector<double> eval_jacobi(const BasisParams& p, double x) { return eval_basis<double>(p, x, false); }

std::vector<double> eval_orthonormal_basis(const BasisParams& p, double x) { return eval_basis<double>(p, x); }

std::vector<DualReal> eval_orthonormal_basis_dual(const BasisParams& p, double x) {
  return eval_basis<DualReal>(p, x);
}

double eval_series(const BasisParams& p, std::span<const double> coeffs, double x) {
  if (coeffs.size() != static_cast<std::size_t>(p.K) + 1)
    throw std::invalid_argument("eval_series: expected K + 1 coefficients");
  const auto basis = eval_orthonormal_basis(p, x);
  double s = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) s += coeffs[k] * basis[k];
  return s;
}

namespace {

// out = c1 * x + c2 * y + c3 * z, elementwise.
void combine(GraphSignal& out, double c1, const GraphSignal& x, double c2, const GraphSignal& y, double c3,
             const GraphSignal& z) {
  auto o = out.flat();
  auto fx = x.flat(), fy = y.flat(), fz = z.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = c1 * fx[i] + c2 * fy[i] + c3 * fz[i];
}

void axpy(GraphSignal& out, double c, const GraphSignal& x) {
  auto o = out.flat();
  auto fx = x.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += c * fx[i];
}

GraphSignal scaled(const GraphSignal& x, double c) {
  GraphSignal y = x;
  for (double& v : y.flat()) v *= c;
  return y;
}

}  // namespace

BasisSignals apply_orthonormal_basis(const graph::SparseMatrix& P, const GraphSignal& X, const BasisParams& p,
                                     bool dual) {
  p.validate();
  if (X.rows() != P.n)
    throw std::invalid_argument("apply_orthonormal_basis: signal has " + std::to_string(X.rows()) +
                                " rows, matrix is " + std::to_string(P.n));
  const std::size_t n_terms = static_cast<std::size_t>(p.K) + 1;
  const std::size_t n = X.rows(), c = X.cols();
  const GraphSignal zero(n, c);

  // Unnormalized P_i(P) X and, in dual mode, its tangents.
  std::vector<GraphSignal> raw(n_terms), raw_a, raw_b;
  raw[0] = X;
  if (dual) {
    raw_a.assign(n_terms, zero);
    raw_b.assign(n_terms, zero);
  }
  const DualReal a(p.a, 1.0, 0.0), b(p.b, 0.0, 1.0);
  GraphSignal py, pya, pyb;
  for (std::size_t i = 1; i < n_terms; ++i) {
    const auto st = recurrence_step(static_cast<int>(i), a, b);
    const GraphSignal& y1 = raw[i - 1];
    const GraphSignal& y2 = i >= 2 ? raw[i - 2] : zero;
    graph::spmv_into(P, y1, py);
    raw[i] = GraphSignal(n, c);
    combine(raw[i], st.slope.value, py, st.shift.value, y1, -st.prev.value, y2);
    if (!dual) continue;

    const GraphSignal& y1a = raw_a[i - 1];
    const GraphSignal& y1b = raw_b[i - 1];
    const GraphSignal& y2a = i >= 2 ? raw_a[i - 2] : zero;
    const GraphSignal& y2b = i >= 2 ? raw_b[i - 2] : zero;
    graph::spmv_into(P, y1a, pya);
    graph::spmv_into(P, y1b, pyb);
    combine(raw_a[i], st.slope.value, pya, st.shift.value, y1a, -st.prev.value, y2a);
    combine(raw_b[i], st.slope.value, pyb, st.shift.value, y1b, -st.prev.value, y2b);
    combine(raw_a[i], 1.0, raw_a[i], st.slope.da, py, st.shift.da, y1);
    combine(raw_b[i], 1.0, raw_b[i], st.slope.db, py, st.shift.db, y1);
    axpy(raw_a[i], -st.prev.da, y2);
    axpy(raw_b[i], -st.prev.db, y2);
  }

  BasisSignals out;
  out.values.reserve(n_terms);
  for (std::size_t i = 0; i < n_terms; ++i) {
    const DualReal r = inv_norm_dual(static_cast<int>(i), p);
    out.values.push_back(scaled(raw[i], r.value));
    if (!dual) continue;
    GraphSignal ga(n, c), gb(n, c);
    combine(ga, r.value, raw_a[i], r.da, raw[i], 0.0, zero);
    combine(gb, r.value, raw_b[i], r.db, raw[i], 0.0, zero);
    out.d_a.push_back(std::move(ga));
    out.d_b.push_back(std::move(gb));
  }
  return out;
}

}  // namespace ognn::jacobi
