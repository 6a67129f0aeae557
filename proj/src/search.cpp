#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <thread>

#include "ognn/rng.hpp"
#include "ognn/train.hpp"

namespace ognn::train {

using nlohmann::json;

namespace {

double trial_score(const ExperimentConfig& cfg, const RunReport& rep) {
  if (cfg.search_task == "classify") return rep.summary.at("val_accuracy").at("mean").get<double>();
  double total = 0.0;
  const auto& avg = rep.summary.at("average_loss");
  for (const auto& [name, v] : avg.items()) total += v.get<double>();
  return total / static_cast<double>(avg.size());
}

}  // namespace

SearchResult hyperparameter_search(const ExperimentConfig& cfg, int budget) {
  cfg.validate();
  if (budget < 1) throw ConfigError("config key 'budget': must be >= 1");
  Rng sampler(Rng::derive(cfg.seed, 7));
  const auto pick = [&](const std::vector<double>& grid) { return grid[sampler.below(grid.size())]; };

  SearchResult out;
  std::vector<ExperimentConfig> configs;
  for (int i = 0; i < budget; ++i) {
    Trial t;
    t.index = i;
    t.lr = pick(cfg.lr_grid);
    t.wd = pick(cfg.wd_grid);
    t.lr_ab = pick(cfg.lr_ab_grid);
    t.a_init = cfg.a_init;
    t.b_init = cfg.b_init;
    if (cfg.search_ab_init) {
      t.a_init = sampler.uniform(-1.0 + jacobi::kAbEpsilon, jacobi::kAbUpper);
      t.b_init = sampler.uniform(-1.0 + jacobi::kAbEpsilon, jacobi::kAbUpper);
    }
    ExperimentConfig tc = cfg;
    tc.task = cfg.search_task;
    tc.lr = t.lr;
    tc.wd = t.wd;
    tc.lr_ab = t.lr_ab;
    tc.a_init = t.a_init;
    tc.b_init = t.b_init;
    configs.push_back(tc);
    out.trials.push_back(t);
  }

  // Trials are independent; results land in fixed slots so the outcome does
  // not depend on scheduling.
  std::vector<RunReport> reports(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        reports[i] = configs[i].task == "classify" ? train_node_classification(configs[i])
                                                    : fit_filter_experiment(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), configs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const bool maximize = cfg.search_task == "classify";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out.trials[i].score = trial_score(configs[i], reports[i]);
    const double best = out.trials[static_cast<std::size_t>(out.best)].score;
    if (maximize ? out.trials[i].score > best : out.trials[i].score < best) out.best = static_cast<int>(i);
  }
  out.best_report = std::move(reports[static_cast<std::size_t>(out.best)]);
  return out;
}

RunReport search_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SearchResult sr = hyperparameter_search(cfg, cfg.budget);
  RunReport report;
  report.task = "search";
  report.config = to_json(cfg);
  report.records = std::move(sr.best_report.records);
  report.curves = std::move(sr.best_report.curves);
  report.checkpoint = std::move(sr.best_report.checkpoint);
  json trials = json::array();
  for (const auto& t : sr.trials)
    trials.push_back({{"index", t.index},
                      {"lr", t.lr},
                      {"wd", t.wd},
                      {"lr_ab", t.lr_ab},
                      {"a_init", t.a_init},
                      {"b_init", t.b_init},
                      {"score", t.score}});
  report.summary = {{"search_task", cfg.search_task},
                    {"objective", cfg.search_task == "classify" ? "max validation accuracy" : "min average loss"},
                    {"budget", cfg.budget},
                    {"trials", trials},
                    {"best_index", sr.best},
                    {"best_summary", sr.best_report.summary}};
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace ognn::train
