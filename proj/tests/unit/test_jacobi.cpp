#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>

#include "ognn/jacobi.hpp"
#include "ognn/quadrature.hpp"
#include "ognn/spectral.hpp"
#include "oracles.hpp"

using namespace ognn;
using namespace ognn::jacobi;

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); }

std::vector<double> grid_values() {
  std::vector<double> v;
  for (int i = 0; i < 7; ++i) v.push_back(-0.9 + 2.9 * i / 6.0);
  return v;
}

}  // namespace

TEST_CASE("norm_sq examples") {
  CHECK(norm_sq(0, {10, 0.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(norm_sq(1, {10, 0.0, 0.0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(std::abs(norm_sq(0, {10, -0.5, -0.5}) - std::numbers::pi) <= 1e-10);
}

TEST_CASE("norm_sq matches Boost closed form and the Legendre norms") {
  for (double a : grid_values())
    for (double b : grid_values())
      for (int i = 0; i <= 10; ++i) CHECK(rel(norm_sq(i, {10, a, b}), oracle::jacobi_norm_sq(i, a, b)) <= 1e-12);
  for (int i = 0; i <= 10; ++i) CHECK(rel(norm_sq(i, {10, 0, 0}), 2.0 / (2 * i + 1)) <= 1e-13);
  // Degree 0 stays finite as a + b + 1 -> 0.
  const double n0 = norm_sq(0, {10, -0.999, -0.0005});
  CHECK(std::isfinite(n0));
  CHECK(n0 > 0.0);
}

TEST_CASE("norm_sq_grad") {
  const NormGrad g0 = norm_sq_grad(0, {10, 0.0, 0.0});
  CHECK(g0.d_a == doctest::Approx(2.0 * (std::log(2.0) - 1.0)).epsilon(1e-13));
  CHECK(g0.d_b == doctest::Approx(2.0 * (std::log(2.0) - 1.0)).epsilon(1e-13));

  const double h = 1e-5;
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const int i = static_cast<int>(rng.below(11));
    const double a = rng.uniform(-0.9, 2.0), b = rng.uniform(-0.9, 2.0);
    const NormGrad g = norm_sq_grad(i, {10, a, b});
    const double fa = (norm_sq(i, {10, a + h, b}) - norm_sq(i, {10, a - h, b})) / (2 * h);
    const double fb = (norm_sq(i, {10, a, b + h}) - norm_sq(i, {10, a, b - h})) / (2 * h);
    CHECK(rel(g.d_a, fa) <= 1e-6);
    CHECK(rel(g.d_b, fb) <= 1e-6);
  }
  const NormGrad g3 = norm_sq_grad(3, {10, 0.7, -0.2});
  const double fa = (norm_sq(3, {10, 0.7 + h, -0.2}) - norm_sq(3, {10, 0.7 - h, -0.2})) / (2 * h);
  CHECK(rel(g3.d_a, fa) <= 1e-6);
}

TEST_CASE("orthonormal basis examples") {
  for (double x : {-1.0, -0.3, 0.0, 0.8, 1.0}) {
    const auto v = eval_orthonormal_basis({0, 0.4, 1.2}, x);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == doctest::Approx(1.0 / std::sqrt(norm_sq(0, {0, 0.4, 1.2}))).epsilon(1e-15));
  }
  CHECK(eval_orthonormal_basis({0, 0, 0}, 0.3)[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(eval_orthonormal_basis({1, 0, 0}, 1.0)[1] == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));
  CHECK(eval_orthonormal_basis({2, 0, 0}, 0.0)[2] == doctest::Approx(-0.5 / std::sqrt(0.4)).epsilon(1e-15));
  CHECK_THROWS_AS(eval_orthonormal_basis({2, 0, 0}, 1.1), std::domain_error);
  CHECK_THROWS_AS(BasisParams({2, -1.0, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("basis agrees with Boost Jacobi and reduces to Legendre") {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const double a = rng.uniform(-0.95, 2.0), b = rng.uniform(-0.95, 2.0), x = rng.uniform(-1.0, 1.0);
    const auto v = eval_orthonormal_basis({10, a, b}, x);
    const auto raw = eval_jacobi({10, a, b}, x);
    for (int k = 0; k <= 10; ++k) {
      CHECK(std::abs(raw[k] - boost::math::jacobi(static_cast<unsigned>(k), a, b, x)) <=
            1e-11 * std::max(1.0, std::abs(raw[k])));
      CHECK(std::abs(v[k] - oracle::orthonormal_jacobi(k, a, b, x)) <= 1e-10 * std::max(1.0, std::abs(v[k])));
    }
  }
  for (double x = -1.0; x <= 1.0; x += 0.05) {
    const auto v = eval_orthonormal_basis({10, 0, 0}, x);
    for (int k = 0; k <= 10; ++k)
      CHECK(v[k] == doctest::Approx(boost::math::legendre_p(k, x) * std::sqrt((2 * k + 1) / 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("orthonormality under quadrature, including the Chebyshev weight") {
  std::vector<std::pair<double, double>> params;
  for (double a : grid_values())
    for (double b : grid_values()) params.emplace_back(a, b);
  params.emplace_back(-0.5, -0.5);
  for (auto [a, b] : params) {
    for (int K = 0; K <= 10; ++K) {
      const BasisParams p{K, a, b};
      const auto rule = quad::gauss_jacobi(static_cast<std::size_t>(K) + 1, a, b);
      std::vector<std::vector<double>> vals;
      for (double x : rule.nodes) vals.push_back(eval_orthonormal_basis(p, x));
      double defect = 0.0;
      for (int i = 0; i <= K; ++i)
        for (int j = 0; j <= K; ++j) {
          double s = 0.0;
          for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * vals[q][i] * vals[q][j];
          defect = std::max(defect, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
      CHECK(defect <= 1e-8);
    }
  }
}

TEST_CASE("dual tangents match central differences") {
  Rng rng(99);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const double a = rng.uniform(-0.9, 2.0), b = rng.uniform(-0.9, 2.0), x = rng.uniform(-1.0, 1.0);
    const BasisParams p{10, a, b};
    const auto d = eval_orthonormal_basis_dual(p, x);
    const auto pa = eval_orthonormal_basis({10, a + h, b}, x), ma = eval_orthonormal_basis({10, a - h, b}, x);
    const auto pb = eval_orthonormal_basis({10, a, b + h}, x), mb = eval_orthonormal_basis({10, a, b - h}, x);
    const auto plain = eval_orthonormal_basis(p, x);
    for (int k = 0; k <= 10; ++k) {
      CHECK(d[k].value == doctest::Approx(plain[k]).epsilon(1e-13));
      const double fa = (pa[k] - ma[k]) / (2 * h), fb = (pb[k] - mb[k]) / (2 * h);
      CHECK(std::abs(d[k].da - fa) <= 1e-4 * std::max({std::abs(fa), std::abs(d[k].da), 1e-3}));
      CHECK(std::abs(d[k].db - fb) <= 1e-4 * std::max({std::abs(fb), std::abs(d[k].db), 1e-3}));
    }
  }
}

TEST_CASE("inv_norm_dual carries the norm derivative") {
  const BasisParams p{5, 0.3, 1.1};
  for (int i = 0; i <= 5; ++i) {
    const DualReal d = inv_norm_dual(i, p);
    CHECK(d.value == doctest::Approx(inv_norm(i, p)).epsilon(1e-15));
    const NormGrad g = norm_sq_grad(i, p);
    const double n = norm_sq(i, p);
    CHECK(d.da == doctest::Approx(-0.5 * g.d_a / (n * std::sqrt(n))).epsilon(1e-12));
  }
}

TEST_CASE("eval_series") {
  const BasisParams p{3, 0.2, -0.4};
  const std::vector<double> c = {0.5, -1.0, 0.25, 2.0};
  const auto v = eval_orthonormal_basis(p, 0.37);
  CHECK(eval_series(p, c, 0.37) == doctest::Approx(0.5 * v[0] - v[1] + 0.25 * v[2] + 2.0 * v[3]).epsilon(1e-14));
}

TEST_CASE("apply_orthonormal_basis examples") {
  Rng rng(5);
  const graph::Graph g = oracle::random_connected_graph(10, 0.3, rng);
  const auto P = graph::propagation_matrix(g);
  const Matrix X = oracle::random_matrix(10, 3, rng);

  const auto b0 = apply_orthonormal_basis(P, X, {0, 0.6, -0.2});
  REQUIRE(b0.values.size() == 1);
  const double inv0 = 1.0 / std::sqrt(norm_sq(0, {0, 0.6, -0.2}));
  for (std::size_t i = 0; i < X.size(); ++i) CHECK(b0.values[0].flat()[i] == doctest::Approx(X.flat()[i] * inv0));

  const auto b1 = apply_orthonormal_basis(P, X, {1, 0, 0});
  const Matrix PX = graph::spmv(P, X);
  for (std::size_t i = 0; i < X.size(); ++i)
    CHECK(b1.values[1].flat()[i] == doctest::Approx(PX.flat()[i] * std::sqrt(1.5)).epsilon(1e-13));
}

TEST_CASE("matrix recurrence equals eigendecomposition evaluation") {
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 4 + rng.below(61);
    const graph::Graph g = oracle::random_connected_graph(n, rng.uniform(0.02, 0.3), rng);
    const auto P = graph::propagation_matrix(g);
    const int K = 1 + static_cast<int>(rng.below(10));
    const double a = rng.uniform(-0.9, 2.0), b = rng.uniform(-0.9, 2.0);
    const Matrix X = oracle::random_matrix(n, 2, rng);
    const auto basis = apply_orthonormal_basis(P, X, {K, a, b}, true);
    for (int k = 0; k <= K; ++k) {
      Matrix alpha(static_cast<std::size_t>(K) + 1, 2);
      alpha(k, 0) = alpha(k, 1) = 1.0;
      CHECK(max_abs_diff(basis.values[k], oracle::spectral_filter(P, alpha, a, b, X)) <= 1e-8);
    }
  }
}

TEST_CASE("matrix tangents match central differences") {
  Rng rng(12);
  const graph::Graph g = oracle::random_connected_graph(12, 0.3, rng);
  const auto P = graph::propagation_matrix(g);
  const Matrix X = oracle::random_matrix(12, 2, rng);
  const double a = 0.4, b = -0.3, h = 1e-5;
  const auto d = apply_orthonormal_basis(P, X, {6, a, b}, true);
  const auto pa = apply_orthonormal_basis(P, X, {6, a + h, b}), ma = apply_orthonormal_basis(P, X, {6, a - h, b});
  const auto pb = apply_orthonormal_basis(P, X, {6, a, b + h}), mb = apply_orthonormal_basis(P, X, {6, a, b - h});
  for (int k = 0; k <= 6; ++k)
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double fa = (pa.values[k].flat()[i] - ma.values[k].flat()[i]) / (2 * h);
      const double fb = (pb.values[k].flat()[i] - mb.values[k].flat()[i]) / (2 * h);
      CHECK(std::abs(d.d_a[k].flat()[i] - fa) <= 1e-4 * std::max(std::abs(fa), 1e-3));
      CHECK(std::abs(d.d_b[k].flat()[i] - fb) <= 1e-4 * std::max(std::abs(fb), 1e-3));
    }
}

TEST_CASE("projection into the feasibility box") {
  BasisParams p{3, -5.0, 7.0};
  p.project();
  CHECK(p.a == -1.0 + kAbEpsilon);
  CHECK(p.b == kAbUpper);
}
