#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ognn::train {

/// Flat experiment configuration. Every field maps to one JSON key of the same
/// name; unknown keys are rejected.
struct ExperimentConfig {
  std::string task = "classify";  // fit_filter | classify | overpass_demo | verify | search

  // Dataset files. An empty `edges` selects the synthetic planted partition.
  std::string edges;
  std::string features;
  std::string labels;
  bool csv_header = false;
  int num_classes = 0;  // 0: infer from labels
  bool add_self_loops = false;

  std::size_t synth_nodes = 400;
  int synth_blocks = 2;
  double p_in = 0.1;
  double p_out = 0.005;
  std::size_t synth_feature_dim = 16;
  double synth_noise = 1.0;

  // Filter fitting. An empty `images_dir` selects synthetic blob images.
  std::string images_dir;
  std::size_t num_images = 10;
  std::size_t image_size = 16;
  std::vector<std::string> filters = {"low", "high", "band", "reject", "comb"};

  int K = 10;
  double a_init = 0.0;
  double b_init = 0.0;
  bool train_ab = true;
  bool freeze_alpha = false;
  std::string mode = "mlp";
  std::size_t hidden = 64;
  double dropout = 0.5;

  int epochs = 1000;
  int patience = 200;
  double lr = 0.01;
  double wd = 5e-4;
  double lr_ab = 0.01;
  std::uint64_t seed = 0;
  int splits = 1;

  std::vector<double> lr_grid = {5e-4, 1e-3, 5e-3, 1e-2, 5e-2};
  std::vector<double> wd_grid = {0.0, 5e-5, 1e-4, 5e-4, 1e-3};
  std::vector<double> lr_ab_grid = {5e-4, 1e-3, 5e-3, 1e-2, 5e-2};
  int budget = 10;
  bool search_ab_init = false;
  std::string search_task = "classify";
  int workers = 1;

  std::vector<double> q_values = {1.5, 2.0, 10.0};
  double compare_wd = 5e-4;
  std::vector<int> curve_epochs;  // empty: 0, E/4, E/2, 3E/4, E

  // Orthonormality check parameters for the verify task.
  std::size_t verify_points = 20;

  std::string output_dir = "out";
  int log_every = 0;  // 0: every epoch for classification, every 50 for filter fitting
  bool record_wall_time = false;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Canonical echo of every key except output_dir.
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Starts from defaults; keys absent from `j` keep their default.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies "key=value"; value is parsed as JSON when possible, else as a string.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// FNV-1a 64 of `text` as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

/// Hash of the canonical JSON echo.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ognn::train
