#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ognn/common.hpp"
#include "ognn/graph.hpp"
#include "ognn/jacobi.hpp"
#include "ognn/rng.hpp"

namespace ognn::model {

/// Feature transform applied before filtering. kIdentity is the filter-only
/// configuration used for filter fitting.
enum class TransformMode { kIdentity, kLinear, kMlp };

std::string_view mode_name(TransformMode mode);
TransformMode parse_mode(std::string_view name);

struct ModelSpec {
  int K = 10;
  double a = 0.0;
  double b = 0.0;
  TransformMode mode = TransformMode::kMlp;
  std::size_t input_dim = 0;  // r
  std::size_t channels = 0;   // c
  std::size_t hidden = 64;
  double dropout = 0.0;
  bool train_ab = true;
  bool freeze_alpha = false;
};

/// Trainable state: basis exponents, one coefficient column per output
/// channel, and the feature transform.
///
/// theta layout: kLinear -> {W (r x c), bias (1 x c)};
/// kMlp -> {W1 (r x h), b1 (1 x h), W2 (h x c), b2 (1 x c)}; kIdentity -> {}.
struct FilterModel {
  jacobi::BasisParams basis;
  Matrix alpha;  // (K + 1) x c
  TransformMode mode = TransformMode::kIdentity;
  std::vector<Matrix> theta;
  double dropout = 0.0;
  bool train_ab = true;
  bool freeze_alpha = false;
  std::uint64_t revision = 0;

  std::size_t channels() const { return alpha.cols(); }
  /// Marks parameters as changed; forward caches taken earlier become stale.
  void touch();
};

/// alpha[0][*] = 1, other coefficients 0; theta uniform in +-1/sqrt(fan_in).
FilterModel make_model(const ModelSpec& spec, Rng& rng);

struct TransformCache {
  Matrix input;       // X after dropout
  Matrix hidden_pre;  // MLP pre-activation
  Matrix hidden;      // MLP activation after ReLU and dropout
  Matrix hidden_mask;
};

/// H = t_theta(X). Dropout masks are drawn from `seed` only when train_mode.
Matrix transform_forward(const FilterModel& m, const Matrix& x, bool train_mode, std::uint64_t seed,
                         TransformCache* cache = nullptr);

struct ForwardCache {
  std::uint64_t revision = 0;
  TransformCache transform;
  Matrix h;
  jacobi::BasisSignals basis;  // B_k H, with tangents when a and b train
};

/// Y[:, j] = sum_k alpha[k][j] (P*_k(P) H)[:, j], H = t_theta(X).
Matrix gnn_forward(const FilterModel& m, const graph::SparseMatrix& P, const Matrix& x, bool train_mode,
                   std::uint64_t seed, ForwardCache* cache = nullptr);

struct Gradients {
  Matrix d_alpha;
  std::vector<Matrix> d_theta;
  double d_a = 0.0;
  double d_b = 0.0;

  static Gradients zeros_like(const FilterModel& m);
  bool all_finite() const;
};

/// Reverse-mode gradients of a scalar loss given dL/dY. Gradients for a and b
/// contract dL/dY against the forward-mode tangents held in the cache. Throws
/// std::logic_error if the cache predates the model's last update.
Gradients backward(const FilterModel& m, const graph::SparseMatrix& P, const ForwardCache& cache,
                   const Matrix& upstream);

/// Per-node -log softmax(Y_v)[y_v].
std::vector<double> per_node_cross_entropy(const Matrix& logits, std::span<const int> labels,
                                           std::span<const std::size_t> nodes);
/// Mean cross entropy over `mask`; the gradient (if requested) is written
/// for all rows, zero outside the mask.
double cross_entropy(const Matrix& logits, std::span<const int> labels, std::span<const std::size_t> mask,
                     Matrix* grad = nullptr);

/// (1/n) ||Y - target||^2, with optional gradient.
double squared_loss(const Matrix& y, const Matrix& target, Matrix* grad = nullptr);

/// Filter-fitting objective: identity transform, single channel.
double squared_filter_loss(const FilterModel& m, const graph::SparseMatrix& P, const GraphSignal& x_in,
                           const GraphSignal& y_target);

/// sum_k alpha[k][j]^2 for each channel j; equals the weighted L2 norm of the
/// learned filter because the basis is orthonormal.
std::vector<double> filter_rms_norm_sq(const FilterModel& m);

/// sum alpha^2 + sum theta^2.
double parameter_penalty(const FilterModel& m);
/// Adds wd * d(parameter_penalty) to grads, skipping frozen groups.
void add_penalty_grad(const FilterModel& m, double wd, Gradients& grads);

/// Multiplies every coefficient by q > 1.
FilterModel scale_coefficients(const FilterModel& m, double q);

/// Learned response per channel at Laplacian eigenvalue lambda in [0, 2]:
/// sum_k alpha[k][j] P*_k(1 - lambda).
std::vector<double> filter_response(const FilterModel& m, double lambda);

// Dense helpers shared with the training code.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a b^T

}  // namespace ognn::model
