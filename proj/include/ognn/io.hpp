#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ognn/config.hpp"
#include "ognn/model.hpp"
#include "ognn/train.hpp"

namespace ognn::io {

/// 17 significant digits; "nan" / "inf" / "-inf" for non-finite values.
std::string format_real(double v);

nlohmann::json checkpoint_json(const model::FilterModel& m, const std::string& config_hash);
model::FilterModel model_from_checkpoint(const nlohmann::json& j);

/// Writes config.json (the canonical echo) into dir, creating it if needed.
void write_config_echo(const train::ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Writes metrics.csv, filter_curve.csv, report.json, plot_filter.gp and,
/// when the report carries a model, checkpoint.json. Returns the files written.
std::vector<std::filesystem::path> write_outputs(const train::RunReport& report, const std::filesystem::path& dir,
                                                 bool record_wall_time = false);

}  // namespace ognn::io
