#include "ognn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace ognn::io {

using nlohmann::json;

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json checkpoint_json(const model::FilterModel& m, const std::string& config_hash) {
  json theta = json::array();
  for (const auto& t : m.theta)
    theta.push_back({{"shape", {t.rows(), t.cols()}}, {"values", std::vector<double>(t.flat().begin(), t.flat().end())}});
  return {{"K", m.basis.K},
          {"a", m.basis.a},
          {"b", m.basis.b},
          {"alpha_shape", {m.alpha.rows(), m.alpha.cols()}},
          {"alpha", std::vector<double>(m.alpha.flat().begin(), m.alpha.flat().end())},
          {"mode", model::mode_name(m.mode)},
          {"theta", theta},
          {"dropout", m.dropout},
          {"train_ab", m.train_ab},
          {"freeze_alpha", m.freeze_alpha},
          {"config_hash", config_hash}};
}

model::FilterModel model_from_checkpoint(const json& j) {
  try {
    model::FilterModel m;
    m.basis = {j.at("K").get<int>(), j.at("a").get<double>(), j.at("b").get<double>()};
    m.basis.validate();
    const auto shape = j.at("alpha_shape").get<std::vector<std::size_t>>();
    const auto alpha = j.at("alpha").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] * shape[1] != alpha.size() || shape[0] != static_cast<std::size_t>(m.basis.K) + 1)
      throw InputError("checkpoint: alpha shape inconsistent");
    m.alpha = Matrix(shape[0], shape[1]);
    std::copy(alpha.begin(), alpha.end(), m.alpha.flat().begin());
    m.mode = model::parse_mode(j.at("mode").get<std::string>());
    for (const auto& t : j.at("theta")) {
      const auto ts = t.at("shape").get<std::vector<std::size_t>>();
      const auto tv = t.at("values").get<std::vector<double>>();
      if (ts.size() != 2 || ts[0] * ts[1] != tv.size()) throw InputError("checkpoint: theta shape inconsistent");
      Matrix w(ts[0], ts[1]);
      std::copy(tv.begin(), tv.end(), w.flat().begin());
      m.theta.push_back(std::move(w));
    }
    m.dropout = j.at("dropout").get<double>();
    m.train_ab = j.at("train_ab").get<bool>();
    m.freeze_alpha = j.at("freeze_alpha").get<bool>();
    m.touch();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: ") + e.what());
  }
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw InputError("I/O failure writing " + p.string());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

void write_config_echo(const train::ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto p = dir / "config.json";
  auto out = open_out(p);
  out << train::to_json(cfg).dump(2) << "\n";
  finish(out, p);
}

std::vector<std::filesystem::path> write_outputs(const train::RunReport& report, const std::filesystem::path& dir,
                                                 bool record_wall_time) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const std::string hash = report.config.is_null() ? std::string() : train::fnv1a_hex(report.config.dump());

  {
    const auto p = dir / "metrics.csv";
    auto out = open_out(p);
    std::size_t channels = 0;
    if (!report.records.empty())
      channels = report.records.front().rms_norm_sq.size();
    else if (report.checkpoint)
      channels = report.checkpoint->channels();
    out << "run,epoch,train_loss,objective,val_loss,val_metric,test_metric,a,b";
    for (std::size_t j = 0; j < channels; ++j) out << ",rms_norm_sq_" << j;
    out << "\n";
    for (const auto& r : report.records) {
      out << csv_field(r.run) << ',' << r.epoch << ',' << format_real(r.train_loss) << ',' << format_real(r.objective)
          << ',' << format_real(r.val_loss) << ',' << format_real(r.val_metric) << ',' << format_real(r.test_metric)
          << ',' << format_real(r.a) << ',' << format_real(r.b);
      for (std::size_t j = 0; j < channels; ++j)
        out << ',' << (j < r.rms_norm_sq.size() ? format_real(r.rms_norm_sq[j]) : std::string("nan"));
      out << "\n";
    }
    finish(out, p);
    written.push_back(p);
  }

  {
    const auto p = dir / "filter_curve.csv";
    auto out = open_out(p);
    out << "lambda";
    for (const auto& c : report.curves) {
      const std::size_t ch = c.values.empty() ? 0 : c.values.front().size();
      for (std::size_t j = 0; j < ch; ++j)
        out << ',' << csv_field(ch == 1 ? c.label : c.label + ":ch" + std::to_string(j));
    }
    out << "\n";
    for (std::size_t i = 0; i < train::kCurvePoints; ++i) {
      out << format_real(train::curve_lambda(i));
      for (const auto& c : report.curves)
        for (double v : c.values.at(i)) out << ',' << format_real(v);
      out << "\n";
    }
    finish(out, p);
    written.push_back(p);
  }

  {
    const auto p = dir / "report.json";
    auto out = open_out(p);
    std::map<std::string, json> trajectories;
    for (const auto& r : report.records) {
      auto& t = trajectories[r.run];
      if (t.is_null()) t = json::array();
      t.push_back({r.epoch, r.a, r.b});
    }
    json j = {{"task", report.task},
              {"config", report.config},
              {"config_hash", hash},
              {"summary", report.summary},
              {"ab_trajectory", trajectories}};
    if (report.checkpoint) {
      j["final_a"] = report.checkpoint->basis.a;
      j["final_b"] = report.checkpoint->basis.b;
    }
    if (record_wall_time) j["wall_seconds"] = report.wall_seconds;
    out << j.dump(2) << "\n";
    finish(out, p);
    written.push_back(p);
  }

  if (report.checkpoint) {
    const auto p = dir / "checkpoint.json";
    auto out = open_out(p);
    out << checkpoint_json(*report.checkpoint, hash).dump(2) << "\n";
    finish(out, p);
    written.push_back(p);
  }

  {
    const auto p = dir / "plot_filter.gp";
    auto out = open_out(p);
    out << "# gnuplot: learned filter responses over the Laplacian spectrum\n"
           "set datafile separator ','\n"
           "set key outside autotitle columnhead\n"
           "set xlabel 'lambda'\n"
           "set ylabel 'g(lambda)'\n"
           "set xrange [0:2]\n"
           "plot for [i=2:*] 'filter_curve.csv' using 1:i with lines\n";
    finish(out, p);
    written.push_back(p);
  }
  return written;
}

}  // namespace ognn::io
