#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ognn/cli.hpp"
#include "ognn/config.hpp"
#include "ognn/io.hpp"

using namespace ognn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ognn_cli_tests" / name;
  fs::remove_all(dir);
  return dir;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "ognn_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = cli::parse_and_run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text != nullptr) *out_text = out.str();
  if (err_text != nullptr) *err_text = err.str();
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config: defaults round trip, unknown keys, overrides") {
  const train::ExperimentConfig def;
  const auto j = train::to_json(def);
  CHECK_FALSE(j.contains("output_dir"));
  CHECK(train::to_json(train::config_from_json(j)) == j);

  CHECK_THROWS_WITH_AS(train::config_from_json({{"learning_rate", 0.1}}), doctest::Contains("learning_rate"),
                       ConfigError);
  CHECK_THROWS_AS(train::config_from_json({{"epochs", "many"}}), ConfigError);
  CHECK_THROWS_AS(train::config_from_json({{"epochs", 2.5}}), ConfigError);

  train::ExperimentConfig cfg;
  train::apply_override(cfg, "lr=0.05");
  train::apply_override(cfg, "mode=linear");
  train::apply_override(cfg, "q_values=[3,4]");
  CHECK(cfg.lr == 0.05);
  CHECK(cfg.mode == "linear");
  CHECK(cfg.q_values == std::vector<double>{3, 4});
  CHECK_THROWS_AS(train::apply_override(cfg, "bogus=1"), ConfigError);
  CHECK_THROWS_AS(train::apply_override(cfg, "noequals"), ConfigError);

  cfg.patience = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.patience = 10;
  cfg.epochs = 5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.epochs = 0;
  CHECK_NOTHROW(cfg.validate());

  train::ExperimentConfig other = def;
  other.output_dir = "elsewhere";
  CHECK(train::config_hash(other) == train::config_hash(def));
  other.seed = 1;
  CHECK(train::config_hash(other) != train::config_hash(def));
  CHECK(train::fnv1a_hex("") == "cbf29ce484222325");
}

TEST_CASE("checkpoint round trip") {
  Rng rng(3);
  model::FilterModel m = model::make_model({3, 0.25, -0.5, model::TransformMode::kMlp, 4, 2, 5, 0.5}, rng);
  m.alpha(2, 1) = 1.0 / 3.0;
  const auto j = io::checkpoint_json(m, "abc");
  const model::FilterModel back = io::model_from_checkpoint(nlohmann::json::parse(j.dump()));
  CHECK(back.alpha == m.alpha);
  CHECK(back.theta == m.theta);
  CHECK(back.basis.a == m.basis.a);
  CHECK(back.basis.b == m.basis.b);
  CHECK(back.basis.K == m.basis.K);
  CHECK(back.mode == m.mode);
  CHECK(back.dropout == m.dropout);
}

TEST_CASE("empty report writes a header-only metrics file") {
  const fs::path dir = scratch("empty");
  train::RunReport r;
  r.task = "classify";
  io::write_outputs(r, dir);
  const std::string csv = slurp(dir / "metrics.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  CHECK(csv.rfind("run,epoch,", 0) == 0);
}

TEST_CASE("CLI: verify-basis") {
  const fs::path dir = scratch("verify");
  std::string out;
  CHECK(run({"verify-basis", "--K", "8", "--a", "0.5", "--b", "-0.3", "--out", dir.string()}, &out) == 0);
  CHECK(out.find("max orthonormality defect") != std::string::npos);
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("CLI: argument and config errors exit 1") {
  std::string err;
  CHECK(run({"verify-basis", "--frobnicate", "3"}, nullptr, &err) == 1);
  CHECK(err.find("--frobnicate") != std::string::npos);
  CHECK(run({"classify", "--config", "missing.json", "--out", scratch("missing").string()}) == 1);
  CHECK(run({}) == 1);
  CHECK(run({"classify", "--set", "epochs=-3", "--out", scratch("neg").string()}) == 1);
  CHECK(run({"verify-basis", "--a", "-1.5", "--out", scratch("bad_a").string()}) == 1);
  std::string help;
  CHECK(run({"--help"}, &help) == 0);
  CHECK(help.find("verify-basis") != std::string::npos);
}

TEST_CASE("CLI: every run writes the config echo and repeats byte-identically") {
  const std::vector<std::vector<std::string>> commands = {
      {"classify", "--set", "synth_nodes=60", "--set", "hidden=8", "--K", "3", "--epochs", "8", "--set", "patience=4"},
      {"fit-filter", "--set", "num_images=1", "--set", "image_size=6", "--epochs", "20", "--K", "4"},
      {"overpass-demo", "--set", "synth_nodes=60", "--set", "mode=linear", "--epochs", "10", "--K", "3"},
      {"verify-basis", "--K", "5"},
      {"search", "--set", "synth_nodes=50", "--set", "budget=2", "--epochs", "4", "--set", "patience=2", "--K", "2"}};
  int idx = 0;
  for (auto cmd : commands) {
    const fs::path d1 = scratch("det" + std::to_string(idx) + "a"), d2 = scratch("det" + std::to_string(idx) + "b");
    ++idx;
    auto c1 = cmd, c2 = cmd;
    for (auto* c : {&c1, &c2}) {
      c->push_back("--seed");
      c->push_back("5");
    }
    c1.push_back("--out");
    c1.push_back(d1.string());
    c2.push_back("--out");
    c2.push_back(d2.string());
    REQUIRE(run(c1) == 0);
    REQUIRE(run(c2) == 0);
    CHECK(fs::exists(d1 / "config.json"));
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(d1)) {
      ++files;
      CHECK_MESSAGE(slurp(e.path()) == slurp(d2 / e.path().filename()), e.path().string());
    }
    CHECK(files >= 5);
  }
}

TEST_CASE("CLI: output directory from the environment") {
  const fs::path dir = scratch("env");
  ::setenv(cli::kOutputDirEnv, dir.string().c_str(), 1);
  const int rc = run({"verify-basis", "--K", "2"});
  ::unsetenv(cli::kOutputDirEnv);
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "report.json"));
}
