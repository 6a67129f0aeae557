#include "ognn/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ognn/jacobi.hpp"
#include "ognn/quadrature.hpp"
#include "ognn/rng.hpp"

namespace ognn::verify {

double fd_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

bool BasisVerification::passed() const {
  return orthonormality_defect <= kOrthonormalityTol && norm_rel_error <= kNormTol && norm_grad_error <= kGradientTol &&
         dual_error <= kGradientTol && regularizer_gap <= kRegularizerTol;
}

BasisVerification verify_basis(int K, double a, double b, std::uint64_t seed, std::size_t points) {
  const jacobi::BasisParams p{K, a, b};
  p.validate();
  BasisVerification v;
  v.K = K;
  v.a = a;
  v.b = b;
  const std::size_t n_terms = static_cast<std::size_t>(K) + 1;
  const quad::QuadRule rule = quad::gauss_jacobi(n_terms, a, b);

  std::vector<std::vector<double>> ortho(rule.size()), raw(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    ortho[q] = jacobi::eval_orthonormal_basis(p, rule.nodes[q]);
    raw[q] = jacobi::eval_jacobi(p, rule.nodes[q]);
  }
  for (std::size_t i = 0; i < n_terms; ++i) {
    for (std::size_t j = 0; j < n_terms; ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * ortho[q][i] * ortho[q][j];
      v.orthonormality_defect = std::max(v.orthonormality_defect, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
    double norm = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) norm += rule.weights[q] * raw[q][i] * raw[q][i];
    const double closed = jacobi::norm_sq(static_cast<int>(i), p);
    v.norm_rel_error = std::max(v.norm_rel_error, std::abs(closed - norm) / closed);

    const jacobi::NormGrad g = jacobi::norm_sq_grad(static_cast<int>(i), p);
    const double h = kFdStep;
    const double fa = (jacobi::norm_sq(static_cast<int>(i), {K, a + h, b}) -
                       jacobi::norm_sq(static_cast<int>(i), {K, a - h, b})) / (2 * h);
    const double fb = (jacobi::norm_sq(static_cast<int>(i), {K, a, b + h}) -
                       jacobi::norm_sq(static_cast<int>(i), {K, a, b - h})) / (2 * h);
    v.norm_grad_error = std::max({v.norm_grad_error, fd_relative_error(g.d_a, fa), fd_relative_error(g.d_b, fb)});
  }

  Rng rng(seed);
  for (std::size_t t = 0; t < points; ++t) {
    const double x = rng.uniform(-1.0, 1.0);
    const auto dual = jacobi::eval_orthonormal_basis_dual(p, x);
    const double h = kFdStep;
    const auto pa = jacobi::eval_orthonormal_basis({K, a + h, b}, x);
    const auto ma = jacobi::eval_orthonormal_basis({K, a - h, b}, x);
    const auto pb = jacobi::eval_orthonormal_basis({K, a, b + h}, x);
    const auto mb = jacobi::eval_orthonormal_basis({K, a, b - h}, x);
    for (std::size_t k = 0; k < n_terms; ++k) {
      v.dual_error = std::max({v.dual_error, fd_relative_error(dual[k].da, (pa[k] - ma[k]) / (2 * h)),
                               fd_relative_error(dual[k].db, (pb[k] - mb[k]) / (2 * h))});
    }
  }

  for (std::size_t t = 0; t < points; ++t) {
    std::vector<double> alpha(n_terms);
    double sum_sq = 0.0;
    for (double& c : alpha) {
      c = rng.normal();
      sum_sq += c * c;
    }
    double quad_norm = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double gval = 0.0;
      for (std::size_t k = 0; k < n_terms; ++k) gval += alpha[k] * ortho[q][k];
      quad_norm += rule.weights[q] * gval * gval;
    }
    v.regularizer_gap = std::max(v.regularizer_gap, std::abs(sum_sq - quad_norm));
  }
  return v;
}

train::RunReport verify_experiment(const train::ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const BasisVerification v = verify_basis(cfg.K, cfg.a_init, cfg.b_init, cfg.seed, cfg.verify_points);
  train::RunReport report;
  report.task = "verify";
  report.config = train::to_json(cfg);
  report.summary = {{"K", v.K},
                    {"a", v.a},
                    {"b", v.b},
                    {"orthonormality_defect", v.orthonormality_defect},
                    {"norm_rel_error", v.norm_rel_error},
                    {"norm_grad_error", v.norm_grad_error},
                    {"dual_error", v.dual_error},
                    {"regularizer_gap", v.regularizer_gap},
                    {"tolerances",
                     {{"orthonormality", kOrthonormalityTol},
                      {"norm", kNormTol},
                      {"gradient", kGradientTol},
                      {"regularizer", kRegularizerTol}}},
                    {"passed", v.passed()}};
  // Basis functions P*_k(1 - lambda) as curves, one channel per degree.
  train::CurveSnapshot basis;
  basis.label = "basis";
  const jacobi::BasisParams p{cfg.K, cfg.a_init, cfg.b_init};
  for (std::size_t i = 0; i < train::kCurvePoints; ++i)
    basis.values.push_back(jacobi::eval_orthonormal_basis(p, 1.0 - train::curve_lambda(i)));
  report.curves.push_back(std::move(basis));
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace ognn::verify
