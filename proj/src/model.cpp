#include "ognn/model.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ognn::model {

namespace {
std::atomic<std::uint64_t> g_revision{0};
}

void FilterModel::touch() { revision = ++g_revision; }

std::string_view mode_name(TransformMode mode) {
  switch (mode) {
    case TransformMode::kIdentity: return "identity";
    case TransformMode::kLinear: return "linear";
    case TransformMode::kMlp: return "mlp";
  }
  return "?";
}

TransformMode parse_mode(std::string_view name) {
  if (name == "identity") return TransformMode::kIdentity;
  if (name == "linear") return TransformMode::kLinear;
  if (name == "mlp") return TransformMode::kMlp;
  throw ConfigError("unknown transform mode '" + std::string(name) + "' (expected identity, linear or mlp)");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: row count mismatch");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: column count mismatch");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.flat()) v = rng.uniform(-bound, bound);
  return m;
}

void add_bias(Matrix& x, const Matrix& bias) {
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) += bias(0, j);
}

Matrix column_sums(const Matrix& x) {
  Matrix s(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) s(0, j) += x(i, j);
  return s;
}

// Inverted dropout mask: 0 with probability p, 1/(1-p) otherwise.
Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  Matrix mask(rows, cols, 1.0);
  if (p <= 0.0) return mask;
  const double keep = 1.0 / (1.0 - p);
  for (double& v : mask.flat()) v = rng.uniform() < p ? 0.0 : keep;
  return mask;
}

void hadamard_inplace(Matrix& x, const Matrix& mask) {
  auto fx = x.flat();
  auto fm = mask.flat();
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] *= fm[i];
}

void check_finite_alpha(const FilterModel& m) {
  for (double v : m.alpha.flat())
    if (!std::isfinite(v)) throw NumericError("filter coefficients contain non-finite values");
}

}  // namespace

FilterModel make_model(const ModelSpec& spec, Rng& rng) {
  if (spec.channels == 0) throw std::invalid_argument("make_model: channel count must be positive");
  if (!(spec.dropout >= 0.0 && spec.dropout < 1.0)) throw std::invalid_argument("make_model: dropout must be in [0, 1)");
  FilterModel m;
  m.basis = {spec.K, spec.a, spec.b};
  m.basis.validate();
  m.alpha = Matrix(static_cast<std::size_t>(spec.K) + 1, spec.channels);
  for (std::size_t j = 0; j < spec.channels; ++j) m.alpha(0, j) = 1.0;
  m.mode = spec.mode;
  m.dropout = spec.dropout;
  m.train_ab = spec.train_ab;
  m.freeze_alpha = spec.freeze_alpha;
  const std::size_t r = spec.input_dim, c = spec.channels;
  switch (spec.mode) {
    case TransformMode::kIdentity:
      if (r != 0 && r != c) throw std::invalid_argument("identity transform needs input_dim == channels");
      break;
    case TransformMode::kLinear: {
      if (r == 0) throw std::invalid_argument("make_model: input_dim must be positive");
      const double bound = 1.0 / std::sqrt(static_cast<double>(r));
      m.theta.push_back(uniform_matrix(r, c, bound, rng));
      m.theta.push_back(uniform_matrix(1, c, bound, rng));
      break;
    }
    case TransformMode::kMlp: {
      if (r == 0 || spec.hidden == 0) throw std::invalid_argument("make_model: input_dim and hidden must be positive");
      const double b1 = 1.0 / std::sqrt(static_cast<double>(r));
      const double b2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
      m.theta.push_back(uniform_matrix(r, spec.hidden, b1, rng));
      m.theta.push_back(uniform_matrix(1, spec.hidden, b1, rng));
      m.theta.push_back(uniform_matrix(spec.hidden, c, b2, rng));
      m.theta.push_back(uniform_matrix(1, c, b2, rng));
      break;
    }
  }
  m.touch();
  return m;
}

Matrix transform_forward(const FilterModel& m, const Matrix& x, bool train_mode, std::uint64_t seed,
                         TransformCache* cache) {
  if (m.mode == TransformMode::kIdentity) {
    if (x.cols() != m.channels())
      throw std::invalid_argument("identity transform: input has " + std::to_string(x.cols()) +
                                  " columns but the model has " + std::to_string(m.channels()) + " channels");
    if (cache) cache->input = x;
    return x;
  }
  const Matrix& w_in = m.theta.at(0);
  if (x.cols() != w_in.rows())
    throw std::invalid_argument("transform_forward: input has " + std::to_string(x.cols()) +
                                " features, model expects " + std::to_string(w_in.rows()));
  Rng rng(seed);
  const bool drop = train_mode && m.dropout > 0.0;
  Matrix input = x;
  if (drop) hadamard_inplace(input, dropout_mask(x.rows(), x.cols(), m.dropout, rng));

  Matrix out;
  if (m.mode == TransformMode::kLinear) {
    out = matmul(input, m.theta[0]);
    add_bias(out, m.theta[1]);
    if (cache) cache->input = std::move(input);
    return out;
  }
  Matrix pre = matmul(input, m.theta[0]);
  add_bias(pre, m.theta[1]);
  Matrix hidden = pre;
  for (double& v : hidden.flat()) v = std::max(v, 0.0);
  Matrix mask = drop ? dropout_mask(hidden.rows(), hidden.cols(), m.dropout, rng)
                     : Matrix(hidden.rows(), hidden.cols(), 1.0);
  if (drop) hadamard_inplace(hidden, mask);
  out = matmul(hidden, m.theta[2]);
  add_bias(out, m.theta[3]);
  if (cache) {
    cache->input = std::move(input);
    cache->hidden_pre = std::move(pre);
    cache->hidden = std::move(hidden);
    cache->hidden_mask = std::move(mask);
  }
  return out;
}

Matrix gnn_forward(const FilterModel& m, const graph::SparseMatrix& P, const Matrix& x, bool train_mode,
                   std::uint64_t seed, ForwardCache* cache) {
  check_finite_alpha(m);
  if (m.alpha.rows() != static_cast<std::size_t>(m.basis.K) + 1)
    throw std::invalid_argument("gnn_forward: alpha must have K + 1 rows");
  TransformCache tc;
  Matrix h = transform_forward(m, x, train_mode, seed, cache ? &tc : nullptr);
  if (h.rows() != P.n)
    throw std::invalid_argument("gnn_forward: features have " + std::to_string(h.rows()) + " rows, graph has " +
                                std::to_string(P.n) + " nodes");
  const bool dual = cache != nullptr && m.train_ab;
  jacobi::BasisSignals basis = jacobi::apply_orthonormal_basis(P, h, m.basis, dual);

  Matrix y(h.rows(), h.cols());
  for (std::size_t k = 0; k < basis.values.size(); ++k) {
    const Matrix& bk = basis.values[k];
    for (std::size_t i = 0; i < y.rows(); ++i)
      for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) += m.alpha(k, j) * bk(i, j);
  }
  if (cache) {
    cache->revision = m.revision;
    cache->transform = std::move(tc);
    cache->h = std::move(h);
    cache->basis = std::move(basis);
  }
  return y;
}

Gradients Gradients::zeros_like(const FilterModel& m) {
  Gradients g;
  g.d_alpha = Matrix(m.alpha.rows(), m.alpha.cols());
  for (const auto& t : m.theta) g.d_theta.emplace_back(t.rows(), t.cols());
  return g;
}

bool Gradients::all_finite() const {
  const auto finite = [](const Matrix& x) {
    return std::all_of(x.flat().begin(), x.flat().end(), [](double v) { return std::isfinite(v); });
  };
  return finite(d_alpha) && std::all_of(d_theta.begin(), d_theta.end(), finite) && std::isfinite(d_a) &&
         std::isfinite(d_b);
}

Gradients backward(const FilterModel& m, const graph::SparseMatrix& P, const ForwardCache& cache,
                   const Matrix& upstream) {
  if (cache.revision != m.revision)
    throw std::logic_error("backward: forward cache is stale (model revision " + std::to_string(m.revision) +
                           ", cache revision " + std::to_string(cache.revision) + ")");
  const Matrix& h = cache.h;
  if (upstream.rows() != h.rows() || upstream.cols() != h.cols())
    throw std::invalid_argument("backward: upstream gradient shape mismatch");
  Gradients g = Gradients::zeros_like(m);
  const std::size_t n = h.rows(), c = h.cols(), n_terms = cache.basis.values.size();

  if (!m.freeze_alpha)
    for (std::size_t k = 0; k < n_terms; ++k) {
      const Matrix& bk = cache.basis.values[k];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) g.d_alpha(k, j) += upstream(i, j) * bk(i, j);
    }

  if (m.train_ab) {
    if (cache.basis.d_a.size() != n_terms) throw std::logic_error("backward: cache lacks basis tangents");
    for (std::size_t k = 0; k < n_terms; ++k) {
      const Matrix& ta = cache.basis.d_a[k];
      const Matrix& tb = cache.basis.d_b[k];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) {
          const double w = upstream(i, j) * m.alpha(k, j);
          g.d_a += w * ta(i, j);
          g.d_b += w * tb(i, j);
        }
    }
  }

  if (m.mode == TransformMode::kIdentity) return g;

  // P is symmetric, so the adjoint of P*_k(P) is itself.
  const jacobi::BasisSignals adj = jacobi::apply_orthonormal_basis(P, upstream, m.basis, false);
  Matrix dh(n, c);
  for (std::size_t k = 0; k < n_terms; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) dh(i, j) += m.alpha(k, j) * adj.values[k](i, j);

  const TransformCache& tc = cache.transform;
  if (m.mode == TransformMode::kLinear) {
    g.d_theta[0] = matmul_tn(tc.input, dh);
    g.d_theta[1] = column_sums(dh);
    return g;
  }
  g.d_theta[2] = matmul_tn(tc.hidden, dh);
  g.d_theta[3] = column_sums(dh);
  Matrix dpre = matmul_nt(dh, m.theta[2]);
  hadamard_inplace(dpre, tc.hidden_mask);
  auto fd = dpre.flat();
  auto fp = tc.hidden_pre.flat();
  for (std::size_t i = 0; i < fd.size(); ++i)
    if (fp[i] <= 0.0) fd[i] = 0.0;
  g.d_theta[0] = matmul_tn(tc.input, dpre);
  g.d_theta[1] = column_sums(dpre);
  return g;
}

std::vector<double> per_node_cross_entropy(const Matrix& logits, std::span<const int> labels,
                                           std::span<const std::size_t> nodes) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (std::size_t v : nodes) {
    const auto row = logits.row(v);
    const auto y = static_cast<std::size_t>(labels[v]);
    if (y >= row.size()) throw std::invalid_argument("cross_entropy: label out of range");
    const double zmax = *std::max_element(row.begin(), row.end());
    if (row[y] == zmax) {
      // log1p keeps the loss of confidently correct nodes exact.
      double rest = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j)
        if (j != y) rest += std::exp(row[j] - zmax);
      out.push_back(std::log1p(rest));
    } else {
      double z = 0.0;
      for (double l : row) z += std::exp(l - zmax);
      out.push_back((zmax - row[y]) + std::log(z));
    }
  }
  return out;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels, std::span<const std::size_t> mask,
                     Matrix* grad) {
  if (mask.empty()) throw std::invalid_argument("cross_entropy: empty mask");
  const std::vector<double> losses = per_node_cross_entropy(logits, labels, mask);
  double total = 0.0;
  for (double l : losses) total += l;
  const double inv = 1.0 / static_cast<double>(mask.size());
  if (grad) {
    *grad = Matrix(logits.rows(), logits.cols());
    for (std::size_t v : mask) {
      const auto row = logits.row(v);
      const double zmax = *std::max_element(row.begin(), row.end());
      double z = 0.0;
      for (double l : row) z += std::exp(l - zmax);
      for (std::size_t j = 0; j < row.size(); ++j) (*grad)(v, j) = std::exp(row[j] - zmax) / z * inv;
      (*grad)(v, static_cast<std::size_t>(labels[v])) -= inv;
    }
  }
  return total * inv;
}

double squared_loss(const Matrix& y, const Matrix& target, Matrix* grad) {
  if (y.rows() != target.rows() || y.cols() != target.cols())
    throw std::invalid_argument("squared_loss: shape mismatch");
  const double inv_n = 1.0 / static_cast<double>(y.rows());
  double s = 0.0;
  if (grad) *grad = Matrix(y.rows(), y.cols());
  auto fy = y.flat();
  auto ft = target.flat();
  for (std::size_t i = 0; i < fy.size(); ++i) {
    const double d = fy[i] - ft[i];
    s += d * d;
    if (grad) grad->flat()[i] = 2.0 * d * inv_n;
  }
  return s * inv_n;
}

double squared_filter_loss(const FilterModel& m, const graph::SparseMatrix& P, const GraphSignal& x_in,
                           const GraphSignal& y_target) {
  if (m.mode != TransformMode::kIdentity || x_in.cols() != 1 || y_target.cols() != 1 || m.channels() != 1)
    throw std::invalid_argument("squared_filter_loss: filter fitting needs an identity transform and one channel");
  return squared_loss(gnn_forward(m, P, x_in, false, 0), y_target);
}

std::vector<double> filter_rms_norm_sq(const FilterModel& m) {
  std::vector<double> out(m.alpha.cols(), 0.0);
  for (std::size_t k = 0; k < m.alpha.rows(); ++k)
    for (std::size_t j = 0; j < m.alpha.cols(); ++j) out[j] += m.alpha(k, j) * m.alpha(k, j);
  return out;
}

double parameter_penalty(const FilterModel& m) {
  double s = 0.0;
  for (double v : m.alpha.flat()) s += v * v;
  for (const auto& t : m.theta)
    for (double v : t.flat()) s += v * v;
  return s;
}

void add_penalty_grad(const FilterModel& m, double wd, Gradients& grads) {
  if (wd == 0.0) return;
  if (!m.freeze_alpha) {
    auto g = grads.d_alpha.flat();
    auto p = m.alpha.flat();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * wd * p[i];
  }
  for (std::size_t t = 0; t < m.theta.size(); ++t) {
    auto g = grads.d_theta[t].flat();
    auto p = m.theta[t].flat();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * wd * p[i];
  }
}

FilterModel scale_coefficients(const FilterModel& m, double q) {
  if (!(q > 1.0)) throw std::invalid_argument("scale_coefficients: q must exceed 1, got " + std::to_string(q));
  FilterModel out = m;
  for (double& v : out.alpha.flat()) v *= q;
  out.touch();
  return out;
}

std::vector<double> filter_response(const FilterModel& m, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 2.0)) throw std::domain_error("filter_response: lambda outside [0, 2]");
  const std::vector<double> basis = jacobi::eval_orthonormal_basis(m.basis, 1.0 - lambda);
  std::vector<double> out(m.alpha.cols(), 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += m.alpha(k, j) * basis[k];
  return out;
}

}  // namespace ognn::model
