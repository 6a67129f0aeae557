#include "ognn/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "ognn/common.hpp"
#include "ognn/jacobi.hpp"

namespace ognn::train {

using nlohmann::json;

#define OGNN_CONFIG_FIELDS(X)                                                                          \
  X(task) X(edges) X(features) X(labels) X(csv_header) X(num_classes) X(add_self_loops) X(synth_nodes) \
  X(synth_blocks) X(p_in) X(p_out) X(synth_feature_dim) X(synth_noise) X(images_dir) X(num_images)     \
  X(image_size) X(filters) X(K) X(a_init) X(b_init) X(train_ab) X(freeze_alpha) X(mode) X(hidden)      \
  X(dropout) X(epochs) X(patience) X(lr) X(wd) X(lr_ab) X(seed) X(splits) X(lr_grid) X(wd_grid)        \
  X(lr_ab_grid) X(budget) X(search_ab_init) X(search_task) X(workers) X(q_values) X(compare_wd)         \
  X(curve_epochs) X(verify_points) X(output_dir) X(log_every) X(record_wall_time)

json to_json(const ExperimentConfig& cfg) {
  json j;
#define OGNN_TO(name) j[#name] = cfg.name;
  OGNN_CONFIG_FIELDS(OGNN_TO)
#undef OGNN_TO
  // Where results land is not part of the experiment; keeping it out of the
  // echo makes outputs of repeated runs comparable byte for byte.
  j.erase("output_dir");
  return j;
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  try {
    // Reject silent float -> int truncation.
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError("expected an integer");
      if constexpr (std::is_unsigned_v<T>)
        if (j.is_number_integer() && j.get<long long>() < 0) throw ConfigError("expected a non-negative integer");
    }
    out = j.get<T>();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "': wrong type (" + j.type_name() + ")");
  }
}

void set_field(ExperimentConfig& cfg, const std::string& key, const json& value) {
#define OGNN_FROM(name)                   \
  if (key == #name) {                     \
    read_field(value, #name, cfg.name);   \
    return;                               \
  }
  OGNN_CONFIG_FIELDS(OGNN_FROM)
#undef OGNN_FROM
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) set_field(cfg, key, value);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  set_field(cfg, key, value);
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kTasks = {"fit_filter", "classify", "overpass_demo", "verify", "search"};
  const auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (!kTasks.count(task)) fail("task", "unknown task '" + task + "'");
  if (search_task != "classify" && search_task != "fit_filter") fail("search_task", "must be classify or fit_filter");
  if (K < 0 || K > 32) fail("K", "must lie in [0, 32]");
  if (epochs < 0) fail("epochs", "must be >= 0");
  if (patience <= 0) fail("patience", "must be > 0");
  // Only classification early-stops; the other tasks ignore patience.
  const bool early_stops = task == "classify" || (task == "search" && search_task == "classify");
  if (early_stops && epochs > 0 && patience > epochs) fail("patience", "must not exceed epochs");
  if (lr_grid.empty()) fail("lr_grid", "must be nonempty");
  if (wd_grid.empty()) fail("wd_grid", "must be nonempty");
  if (lr_ab_grid.empty()) fail("lr_ab_grid", "must be nonempty");
  if (!(lr > 0)) fail("lr", "must be > 0");
  if (!(lr_ab >= 0)) fail("lr_ab", "must be >= 0");
  if (!(wd >= 0)) fail("wd", "must be >= 0");
  if (!(compare_wd >= 0)) fail("compare_wd", "must be >= 0");
  if (!(dropout >= 0 && dropout < 1)) fail("dropout", "must lie in [0, 1)");
  const double lo = -1.0 + jacobi::kAbEpsilon;
  if (!(a_init >= lo && a_init <= jacobi::kAbUpper)) fail("a_init", "must lie in [-1 + 1e-3, 2]");
  if (!(b_init >= lo && b_init <= jacobi::kAbUpper)) fail("b_init", "must lie in [-1 + 1e-3, 2]");
  if (mode != "mlp" && mode != "linear") fail("mode", "must be mlp or linear");
  if (hidden == 0) fail("hidden", "must be > 0");
  if (splits < 1) fail("splits", "must be >= 1");
  if (budget < 1) fail("budget", "must be >= 1");
  if (workers < 1) fail("workers", "must be >= 1");
  if (num_images == 0) fail("num_images", "must be > 0");
  if (image_size < 2) fail("image_size", "must be >= 2");
  if (filters.empty()) fail("filters", "must be nonempty");
  if (synth_nodes < 5) fail("synth_nodes", "must be >= 5");
  if (synth_blocks < 2) fail("synth_blocks", "must be >= 2");
  if (!(p_in >= 0 && p_in <= 1)) fail("p_in", "must lie in [0, 1]");
  if (!(p_out >= 0 && p_out <= 1)) fail("p_out", "must lie in [0, 1]");
  if (synth_feature_dim < static_cast<std::size_t>(synth_blocks)) fail("synth_feature_dim", "must be >= synth_blocks");
  for (double q : q_values)
    if (!(q > 1)) fail("q_values", "every q must exceed 1");
  for (int e : curve_epochs)
    if (e < 0 || e > epochs) fail("curve_epochs", "epochs must lie in [0, epochs]");
  if (log_every < 0) fail("log_every", "must be >= 0");
  if (verify_points == 0) fail("verify_points", "must be > 0");
  if (output_dir.empty()) fail("output_dir", "must be nonempty");
  if (num_classes < 0) fail("num_classes", "must be >= 0");
}

std::string config_hash(const ExperimentConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ognn::train
