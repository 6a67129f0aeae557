#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ognn/config.hpp"
#include "ognn/graph.hpp"
#include "ognn/model.hpp"
#include "ognn/spectral.hpp"

namespace ognn::train {

// ---------------------------------------------------------------------------
// Optimization

struct AdamSettings {
  double lr_main = 0.01;
  double lr_ab = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over every parameter group of a FilterModel. lr_ab
/// drives (a, b), lr_main everything else; (a, b) are projected back into the
/// feasibility box after each step. Frozen groups are left untouched.
class Adam {
 public:
  Adam(const model::FilterModel& m, AdamSettings settings);

  /// Throws NumericError if any gradient entry is non-finite.
  void step(model::FilterModel& m, const model::Gradients& g);

  std::size_t steps() const { return steps_; }
  const AdamSettings& settings() const { return settings_; }

 private:
  struct Moments {
    std::vector<double> first;
    std::vector<double> second;
  };
  void update(std::span<double> params, std::span<const double> grads, Moments& mom, double lr);

  AdamSettings settings_;
  std::size_t steps_ = 0;
  Moments alpha_;
  std::vector<Moments> theta_;
  Moments ab_;
};

/// data_loss + wd * (sum alpha^2 + sum theta^2).
double regularized_loss(const model::FilterModel& m, double data_loss, double wd);

// ---------------------------------------------------------------------------
// Data

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then floor(0.6 n) / floor(0.2 n) / rest. Each set is sorted.
Split split_nodes(std::size_t n, std::uint64_t seed, double train_ratio = 0.6, double val_ratio = 0.2);

struct PlantedPartitionSpec {
  std::size_t n = 400;
  int blocks = 2;
  double p_in = 0.1;
  double p_out = 0.005;
  std::size_t feature_dim = 16;
  double noise = 1.0;
};

/// Stochastic block graph with labels = block and features = one-hot(block)
/// plus Gaussian noise in every coordinate. A node left isolated is joined to
/// one random member of its own block.
graph::Graph planted_partition(const PlantedPartitionSpec& spec, std::uint64_t seed);

/// Images made of a few random Gaussian blobs, rescaled to [0, 255].
std::vector<graph::GrayImage> synthetic_images(std::size_t count, std::size_t size, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reports

struct EpochRecord {
  std::string run;
  int epoch = 0;
  double train_loss = 0.0;
  double objective = 0.0;  // train_loss + wd * penalty
  double val_loss = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> rms_norm_sq;
};

/// Learned filter responses on the 101-point lambda grid.
struct CurveSnapshot {
  std::string label;
  std::vector<std::vector<double>> values;  // [grid point][channel]
};

struct RunReport {
  std::string task;
  nlohmann::json config;
  std::vector<EpochRecord> records;
  std::vector<CurveSnapshot> curves;
  nlohmann::json summary = nlohmann::json::object();
  std::optional<model::FilterModel> checkpoint;
  double wall_seconds = 0.0;
};

inline constexpr std::size_t kCurvePoints = 101;
double curve_lambda(std::size_t i);
CurveSnapshot filter_curve(const model::FilterModel& m, std::string label);

// ---------------------------------------------------------------------------
// Drivers

struct ClassificationResult {
  std::vector<EpochRecord> records;
  int best_epoch = 0;
  double best_val_acc = 0.0;
  double best_val_loss = 0.0;
  double test_acc = 0.0;  // at best_epoch
  model::FilterModel best_model;
  model::FilterModel final_model;
  std::vector<CurveSnapshot> curves;
};

struct ClassificationOptions {
  double lr = 0.01;
  double lr_ab = 0.01;
  double wd = 5e-4;
  int epochs = 1000;
  int patience = 200;  // <= 0 disables early stopping
  std::vector<int> curve_epochs;
  int log_every = 1;
};

/// Full-graph training with cross entropy on the train split and early
/// stopping on validation accuracy (ties broken by validation loss). Epoch 0
/// holds the metrics of the initial model.
ClassificationResult train_classifier(const graph::Graph& g, const graph::SparseMatrix& P, const Split& split,
                                      const model::ModelSpec& spec, const ClassificationOptions& opts,
                                      std::uint64_t seed, const std::string& run_label);

/// Loads the configured dataset or builds the synthetic planted partition.
graph::Graph classification_dataset(const ExperimentConfig& cfg);

/// Exact low-pass baseline: features filtered by exp(-10 lambda^2) over the
/// dense spectrum, then nearest class centroid fitted on the train split.
/// Returns test accuracy.
double spectral_lowpass_oracle_accuracy(const graph::Graph& g, const Split& split, bool add_self_loops = false);

RunReport train_node_classification(const ExperimentConfig& cfg);

struct FitOptions {
  int K = 10;
  double a_init = 0.0;
  double b_init = 0.0;
  bool train_ab = true;
  bool freeze_alpha = false;
  double lr = 0.01;
  double lr_ab = 0.01;
  double wd = 0.0;
  int epochs = 2000;
  int log_every = 50;
};

struct FitResult {
  double final_loss = 0.0;
  model::FilterModel model;
  std::vector<EpochRecord> records;
};

/// Trains a filter-only model (identity transform, one channel) to map x to y.
FitResult fit_filter_signal(const graph::SparseMatrix& P, const GraphSignal& x, const GraphSignal& y,
                            const FitOptions& opts, const std::string& run_label);

RunReport fit_filter_experiment(const ExperimentConfig& cfg);

struct OverpassCheck {
  double q = 0.0;
  std::size_t nodes = 0;
  std::size_t strictly_correct = 0;
  std::size_t argmax_violations = 0;
  std::size_t loss_violations = 0;
  double max_strict_delta = 0.0;  // largest loss change among strictly correct nodes (< 0 expected)
  std::vector<double> deltas;     // per node, scaled minus original loss
};

/// Scales coefficients by q and compares predictions and per-node losses on
/// all nodes: argmax must be unchanged, loss must drop on nodes whose correct
/// logit is the strict row maximum and stay equal on rows of equal logits.
OverpassCheck check_coefficient_scaling(const model::FilterModel& m, const graph::SparseMatrix& P,
                                        const Matrix& x, std::span<const int> labels, double q);

RunReport overpass_demo(const ExperimentConfig& cfg);

struct Trial {
  int index = 0;
  double lr = 0.0;
  double wd = 0.0;
  double lr_ab = 0.0;
  double a_init = 0.0;
  double b_init = 0.0;
  double score = 0.0;  // validation accuracy (classify) or average loss (fit_filter)
};

struct SearchResult {
  std::vector<Trial> trials;
  int best = 0;
  RunReport best_report;
};

/// Seeded random search over the configured grids.
SearchResult hyperparameter_search(const ExperimentConfig& cfg, int budget);

RunReport search_experiment(const ExperimentConfig& cfg);

}  // namespace ognn::train
