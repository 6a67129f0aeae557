// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ognn/jacobi.hpp"
#include "ognn/model.hpp"
#include "ognn/quadrature.hpp"
#include "ognn/train.hpp"
#include "oracles.hpp"

using namespace ognn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> box_grid() {
  std::vector<double> v;
  for (int i = 0; i < 7; ++i) v.push_back(-0.9 + 2.9 * i / 6.0);
  return v;
}

Outcome ac1_orthonormality() {
  const auto t0 = Clock::now();
  double defect = 0.0;
  for (double a : box_grid())
    for (double b : box_grid()) {
      const jacobi::BasisParams p{10, a, b};
      const auto rule = quad::gauss_jacobi(11, a, b);
      std::vector<std::vector<double>> vals;
      for (double x : rule.nodes) vals.push_back(jacobi::eval_orthonormal_basis(p, x));
      for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
          double s = 0.0;
          for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * vals[q][i] * vals[q][j];
          defect = std::max(defect, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    }
  const double t = seconds_since(t0);
  return {defect <= 1e-8 && t < 5.0, fmt("max defect %.3e (tol 1e-8), %.3f s (limit 5 s)", defect, t)};
}

Outcome ac2_norms() {
  double worst = 0.0;
  for (double a : box_grid())
    for (double b : box_grid()) {
      const jacobi::BasisParams p{10, a, b};
      const auto rule = quad::gauss_jacobi(11, a, b);
      std::vector<std::vector<double>> vals;
      for (double x : rule.nodes) vals.push_back(jacobi::eval_jacobi(p, x));
      for (int i = 0; i <= 10; ++i) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * vals[q][i] * vals[q][i];
        const double closed = jacobi::norm_sq(i, p);
        worst = std::max(worst, std::abs(closed - s) / closed);
      }
    }
  const double cheb = std::abs(jacobi::norm_sq(0, {0, -0.5, -0.5}) - std::numbers::pi);
  return {worst <= 1e-8 && cheb <= 1e-10,
          fmt("max relative error %.3e (tol 1e-8); |norm0^2 - pi| at a=b=-0.5: %.3e (tol 1e-10)", worst, cheb)};
}

Outcome ac3_regularizer() {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int K = static_cast<int>(rng.below(11));
    const double a = rng.uniform(-1.0 + jacobi::kAbEpsilon, jacobi::kAbUpper);
    const double b = rng.uniform(-1.0 + jacobi::kAbEpsilon, jacobi::kAbUpper);
    const jacobi::BasisParams p{K, a, b};
    std::vector<double> alpha(static_cast<std::size_t>(K) + 1);
    double sum = 0.0;
    for (double& v : alpha) {
      v = rng.uniform(-2.0, 2.0);
      sum += v * v;
    }
    const auto rule = quad::gauss_jacobi(static_cast<std::size_t>(K) + 1, a, b);
    const auto g = [&](double x) { return jacobi::eval_series(p, alpha, x); };
    worst = std::max(worst, std::abs(sum - quad::weighted_inner_product(g, g, rule)));
  }
  return {worst <= 1e-8, fmt("max |sum alpha^2 - <g,g>_w| over 50 draws: %.3e (tol 1e-8)", worst)};
}

Outcome ac4_gradients() {
  const auto t0 = Clock::now();
  const double h = 1e-5, wd = 5e-3;
  std::size_t checked = 0, failed = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(7000 + seed);
    const graph::Graph g = oracle::random_connected_graph(12, 0.25, rng);
    const auto P = graph::propagation_matrix(g);
    const Matrix x = oracle::random_matrix(12, 6, rng);
    std::vector<int> labels;
    for (int i = 0; i < 12; ++i) labels.push_back(static_cast<int>(rng.below(3)));
    const std::vector<std::size_t> mask = {0, 2, 3, 5, 7, 8, 11};
    const auto mode = seed % 2 == 0 ? model::TransformMode::kMlp : model::TransformMode::kLinear;
    model::FilterModel m =
        model::make_model({4, rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5), mode, 6, 3, 5, 0.2}, rng);
    for (double& v : m.alpha.flat()) v = rng.uniform(-1.0, 1.0);
    m.touch();

    auto objective = [&](model::Gradients* grads) {
      model::ForwardCache cache;
      const Matrix y = model::gnn_forward(m, P, x, true, seed, grads != nullptr ? &cache : nullptr);
      Matrix up;
      const double loss = model::cross_entropy(y, labels, mask, grads != nullptr ? &up : nullptr);
      if (grads != nullptr) {
        *grads = model::backward(m, P, cache, up);
        model::add_penalty_grad(m, wd, *grads);
      }
      return train::regularized_loss(m, loss, wd);
    };
    model::Gradients grads;
    objective(&grads);
    auto probe = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + h;
      m.touch();
      const double up = objective(nullptr);
      param = keep - h;
      m.touch();
      const double down = objective(nullptr);
      param = keep;
      m.touch();
      const double numeric = (up - down) / (2 * h);
      const double err = std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-3);
      worst = std::max(worst, err);
      ++checked;
      failed += err > 1e-4;
    };
    for (std::size_t i = 0; i < m.alpha.size(); ++i) probe(m.alpha.flat()[i], grads.d_alpha.flat()[i]);
    for (std::size_t t = 0; t < m.theta.size(); ++t)
      for (std::size_t i = 0; i < m.theta[t].size(); ++i) probe(m.theta[t].flat()[i], grads.d_theta[t].flat()[i]);
    probe(m.basis.a, grads.d_a);
    probe(m.basis.b, grads.d_b);
  }
  const double t = seconds_since(t0);
  return {failed == 0 && t < 30.0,
          fmt("%zu parameters, %zu over tolerance, max relative error %.3e (tol 1e-4), %.2f s (limit 30 s)", checked,
              failed, worst, t)};
}

Outcome ac5_overpassing() {
  train::ExperimentConfig cfg;
  cfg.seed = 5;
  const train::RunReport r = train::overpass_demo(cfg);
  std::size_t models = 0, checks = 0, argmax = 0, loss = 0, strict = 0;
  double worst_delta = -INFINITY;
  for (const auto& run : r.summary.at("runs")) {
    ++models;
    for (const auto& c : run.at("scaling_checks")) {
      ++checks;
      argmax += c.at("argmax_violations").get<std::size_t>();
      loss += c.at("loss_violations").get<std::size_t>();
      strict += c.at("strictly_correct").get<std::size_t>();
      if (c.at("strictly_correct").get<std::size_t>() > 0)
        worst_delta = std::max(worst_delta, c.at("max_strict_delta").get<double>());
    }
  }
  const bool pass = models == 2 && checks == 6 && argmax == 0 && loss == 0 && strict > 0 && worst_delta < 0.0;
  return {pass, fmt("%zu models x q in {1.5, 2, 10}: %zu argmax and %zu loss violations, %zu strictly-correct node "
                    "checks, largest loss change %.3e",
                    models, argmax, loss, strict, worst_delta)};
}

Outcome ac6_oracle_equivalence() {
  Rng rng(606);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + rng.below(63);
    const graph::Graph g = oracle::random_connected_graph(n, rng.uniform(0.02, 0.4), rng);
    const auto P = graph::propagation_matrix(g);
    const int K = static_cast<int>(rng.below(9));
    const double a = rng.uniform(-0.9, 2.0), b = rng.uniform(-0.9, 2.0);
    model::FilterModel m = model::make_model({K, a, b, model::TransformMode::kLinear, 3, 2, 8, 0.0}, rng);
    for (double& v : m.alpha.flat()) v = rng.uniform(-1.0, 1.0);
    m.touch();
    const Matrix x = oracle::random_matrix(n, 3, rng);
    const Matrix h = model::transform_forward(m, x, false, 0);
    worst = std::max(worst, max_abs_diff(model::gnn_forward(m, P, x, false, 0), oracle::spectral_filter(P, m.alpha, a, b, h)));
  }
  return {worst <= 1e-8, fmt("max abs difference over 20 graphs (n <= 64, K <= 8): %.3e (tol 1e-8)", worst)};
}

Outcome ac7_filter_fitting() {
  const auto t0 = Clock::now();
  train::ExperimentConfig cfg;
  cfg.task = "fit_filter";
  cfg.num_images = 10;
  cfg.image_size = 16;
  cfg.K = 10;
  cfg.epochs = 2000;
  cfg.seed = 7;
  const train::RunReport r = train::fit_filter_experiment(cfg);
  const double t = seconds_since(t0);
  const auto& avg = r.summary.at("average_loss");
  const double low = avg.at("LOW"), high = avg.at("HIGH"), band = avg.at("BAND"), reject = avg.at("REJECT"),
               comb = avg.at("COMB");
  const bool pass = low <= 1e-2 && high <= 1e-2 && band <= 1e-2 && comb <= 0.35 && low <= band && band <= comb &&
                    t < 300.0;
  return {pass, fmt("LOW %.3e HIGH %.3e BAND %.3e REJECT %.3e COMB %.3e (limits 1e-2 / 0.35, LOW <= BAND <= COMB), "
                    "%.1f s (limit 300 s)",
                    low, high, band, reject, comb, t)};
}

Outcome ac8_classification() {
  train::ExperimentConfig cfg;
  cfg.seed = 11;
  const train::RunReport r = train::train_node_classification(cfg);
  const auto& split = r.summary.at("splits").at(0);
  const double acc = split.at("test_accuracy");
  const double oracle_acc = split.at("lowpass_oracle_test_accuracy");
  const bool pass = acc >= 0.90 && std::abs(acc - oracle_acc) <= 0.02;
  return {pass, fmt("test accuracy %.4f (min 0.90), low-pass oracle %.4f, gap %.4f (max 0.02)", acc, oracle_acc,
                    std::abs(acc - oracle_acc))};
}

Outcome ac9_moments() {
  const double vals[] = {-0.5, 0.0, 0.5, 1.0, 2.0};
  double worst = 0.0;
  for (double a : vals)
    for (double b : vals) {
      const auto M = oracle::weight_moments(a, b, 33);
      for (std::size_t m = 1; m <= 16; ++m) {
        const auto rule = quad::gauss_jacobi(m, a, b);
        for (int d = 0; d <= static_cast<int>(2 * m - 1); ++d) {
          double s = 0.0;
          for (std::size_t i = 0; i < m; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], d);
          const double scale = std::max(std::abs(M[d]), M[d % 2 == 0 ? d : d + 1]);
          worst = std::max(worst, std::abs(s - M[d]) / scale);
        }
      }
    }
  return {worst <= 1e-9, fmt("max relative moment error, m <= 16, 25 (a, b) pairs: %.3e (tol 1e-9)", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac10_determinism() {
  const std::vector<std::string> commands = {
      "classify --set synth_nodes=120 --epochs 60 --set patience=30",
      "fit-filter --set num_images=2 --set image_size=8 --epochs 100",
      "overpass-demo --set synth_nodes=120 --epochs 40",
      "verify-basis --K 10 --a 0.5 --b -0.3",
      "search --set synth_nodes=80 --set budget=3 --set workers=2 --epochs 20 --set patience=10"};
  const fs::path root = fs::temp_directory_path() / "ognn_acceptance_determinism";
  fs::remove_all(root);
  std::size_t files = 0, mismatched = 0, failed_runs = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(root / (std::to_string(i) + "_" + std::to_string(rep)));
      const std::string cmd = std::string(OGNN_CLI_PATH) + " " + commands[i] + " --seed 13 --out " +
                              dirs.back().string() + " > /dev/null 2>&1";
      failed_runs += std::system(cmd.c_str()) != 0;
    }
    if (!fs::exists(dirs[0])) continue;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      ++files;
      mismatched += slurp(e.path()) != slurp(dirs[1] / e.path().filename());
    }
  }
  return {failed_runs == 0 && mismatched == 0 && files > 0,
          fmt("5 subcommands run twice: %zu failed runs, %zu of %zu files differ", failed_runs, mismatched, files)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 orthonormality on the (a, b) grid", ac1_orthonormality},
      {"AC2 closed-form norms", ac2_norms},
      {"AC3 coefficient norm equals filter norm", ac3_regularizer},
      {"AC4 gradient fidelity", ac4_gradients},
      {"AC5 coefficient scaling on demo models", ac5_overpassing},
      {"AC6 dense-eig oracle equivalence", ac6_oracle_equivalence},
      {"AC7 filter fitting on synthetic images", ac7_filter_fitting},
      {"AC8 planted-partition classification", ac8_classification},
      {"AC9 quadrature moment exactness", ac9_moments},
      {"AC10 CLI determinism", ac10_determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
