#include "ognn/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ognn/config.hpp"
#include "ognn/io.hpp"
#include "ognn/train.hpp"
#include "ognn/verify.hpp"

namespace ognn::cli {

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> K;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<int> epochs;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config_path, "JSON experiment config");
  sub->add_option("--set", o.overrides, "Override a config key (key=value), repeatable");
  sub->add_option("--seed", o.seed, "Random seed");
  sub->add_option("--out", o.out_dir, "Output directory");
  sub->add_option("--K", o.K, "Polynomial degree");
  sub->add_option("--a", o.a, "Initial Jacobi exponent a");
  sub->add_option("--b", o.b, "Initial Jacobi exponent b");
  sub->add_option("--epochs", o.epochs, "Training epochs");
}

train::ExperimentConfig build_config(const std::string& task, const CommonOptions& o) {
  train::ExperimentConfig cfg = o.config_path.empty() ? train::ExperimentConfig{} : train::load_config(o.config_path);
  for (const auto& s : o.overrides) train::apply_override(cfg, s);
  cfg.task = task;
  if (o.seed) cfg.seed = *o.seed;
  if (o.K) cfg.K = *o.K;
  if (o.a) cfg.a_init = *o.a;
  if (o.b) cfg.b_init = *o.b;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') cfg.output_dir = env;
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  cfg.validate();
  return cfg;
}

train::RunReport run_task(const train::ExperimentConfig& cfg) {
  if (cfg.task == "fit_filter") return train::fit_filter_experiment(cfg);
  if (cfg.task == "classify") return train::train_node_classification(cfg);
  if (cfg.task == "overpass_demo") return train::overpass_demo(cfg);
  if (cfg.task == "search") return train::search_experiment(cfg);
  return verify::verify_experiment(cfg);
}

void print_summary(const train::RunReport& r, std::ostream& out) {
  const auto& s = r.summary;
  if (r.task == "verify") {
    out << "K = " << s.at("K") << ", a = " << s.at("a") << ", b = " << s.at("b") << "\n"
        << "max orthonormality defect: " << io::format_real(s.at("orthonormality_defect").get<double>()) << "\n"
        << "max norm relative error:   " << io::format_real(s.at("norm_rel_error").get<double>()) << "\n"
        << "max norm gradient error:   " << io::format_real(s.at("norm_grad_error").get<double>()) << "\n"
        << "max dual tangent error:    " << io::format_real(s.at("dual_error").get<double>()) << "\n"
        << "max regularizer gap:       " << io::format_real(s.at("regularizer_gap").get<double>()) << "\n"
        << (s.at("passed").get<bool>() ? "PASS" : "FAIL") << "\n";
  } else if (r.task == "fit_filter") {
    for (const auto& [name, v] : s.at("average_loss").items())
      out << name << " average loss: " << io::format_real(v.get<double>()) << "\n";
  } else if (r.task == "classify") {
    const auto& t = s.at("test_accuracy");
    out << "test accuracy: " << io::format_real(t.at("mean").get<double>());
    if (t.at("count").get<int>() > 1)
      out << " (95% CI " << io::format_real(t.at("ci95_low").get<double>()) << " .. "
          << io::format_real(t.at("ci95_high").get<double>()) << ")";
    out << "\n";
  } else if (r.task == "overpass_demo") {
    for (const auto& run : s.at("runs"))
      out << run.at("run").get<std::string>()
          << ": final filter norm = " << io::format_real(run.at("final_filter_norm").get<double>()) << "\n";
    out << "coefficient scaling checks: " << (s.at("scaling_checks_pass").get<bool>() ? "pass" : "FAIL") << "\n";
  } else if (r.task == "search") {
    const auto& best = s.at("trials").at(s.at("best_index").get<std::size_t>());
    out << "best trial " << best.at("index") << ": lr = " << best.at("lr") << ", wd = " << best.at("wd")
        << ", lr_ab = " << best.at("lr_ab") << ", score = " << io::format_real(best.at("score").get<double>())
        << "\n";
  }
}

}  // namespace

int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orthonormal Jacobi spectral filters: training, fitting and verification"};
  app.require_subcommand(1);
  const std::map<std::string, std::string> tasks = {{"fit-filter", "fit_filter"},
                                                    {"classify", "classify"},
                                                    {"overpass-demo", "overpass_demo"},
                                                    {"verify-basis", "verify"},
                                                    {"search", "search"}};
  const std::map<std::string, std::string> help = {
      {"fit-filter", "Fit the five target filters on grid-graph images"},
      {"classify", "Node classification with early stopping"},
      {"overpass-demo", "Unregularized training with filter-norm logging and coefficient scaling checks"},
      {"verify-basis", "Check the basis against the quadrature oracle"},
      {"search", "Random search over the hyperparameter grids"}};
  CommonOptions opts;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, task] : tasks) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    add_common(sub, opts);
    subs[name] = sub;
  }

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::string name;
  for (const auto& [n, sub] : subs)
    if (sub->parsed()) name = n;

  try {
    const train::ExperimentConfig cfg = build_config(tasks.at(name), opts);
    const std::filesystem::path dir = cfg.output_dir;
    io::write_config_echo(cfg, dir);
    const train::RunReport report = run_task(cfg);
    io::write_outputs(report, dir, cfg.record_wall_time);
    print_summary(report, out);
    out << "outputs written to " << dir.string() << "\n";
    if (report.task == "verify" && !report.summary.at("passed").get<bool>()) return kExitNumeric;
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace ognn::cli
