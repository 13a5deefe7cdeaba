#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "plab/runlog.hpp"
#include "plab/xlab.hpp"

using namespace plab;
namespace fs = std::filesystem;

namespace {

std::string read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string((std::istreambuf_iterator<char>(f)), {});
}

std::string fresh_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p.string();
}

// Fast toy config: tiny model inputs, few steps, cheap normalization.
const char* kTinyConfig = R"({
  "experiment": "single_run",
  "train": {
    "profile": "toy",
    "mixture": [{"task": "lr", "dim": 3, "mu": 1.0, "weight": 1.0}],
    "n": 6, "batch": 4, "steps": 8, "lr": 0.001,
    "eval_cadence": 4, "eval_batch": 4,
    "norm_mode": "manual", "c_manual": [1.0]
  },
  "seeds": [1],
  "out": "unused"
})";

}  // namespace

TEST_CASE("experiment config round-trips through JSON") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  CHECK(cfg.kind == ExperimentKind::SingleRun);
  CHECK(cfg.train.mixture.entries.size() == 1);
  CHECK(cfg.train.mixture.entries[0].task.kind == TaskKind::LinearRegression);
  CHECK(cfg.train.n == 6);
  std::string emitted = experiment_config_json(cfg);
  ExperimentConfig back = parse_experiment_config(emitted);
  CHECK(experiment_config_json(back) == emitted);
}

TEST_CASE("unknown fields are rejected wherever they appear") {
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"expriment": "sweep"})"),
                       doctest::Contains("expriment"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(R"({"train": {"learning_rate": 0.1}})"),
      doctest::Contains("learning_rate"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      parse_experiment_config(
          R"({"train": {"mixture": [{"task": "lr", "dimension": 4}]}})"),
      doctest::Contains("dimension"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_experiment_config(R"({"fl": {"width": 10}})"),
                       doctest::Contains("width"), std::invalid_argument);
}

TEST_CASE("unknown task and experiment names are rejected") {
  CHECK_THROWS_AS(
      parse_experiment_config(R"({"train": {"mixture": [{"task": "cubic"}]}})"),
      std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"experiment": "mega"})"),
                  std::invalid_argument);
}

TEST_CASE("jsonl persistence round-trips byte-identically") {
  RunLog log;
  log.task_names = {"lr", "sp2"};
  for (int t = 1; t <= 5; ++t) {
    for (int m = 0; m < 2; ++m) {
      MetricsRecord r;
      r.step = t;
      r.task = m;
      r.loss_norm = 1.0 / (t + m + 0.123456789);
      if (t % 2 == 0) {
        r.eval = 0.5 * t;
        r.nc_dist = 1e-3 * t;
      }
      log.records.push_back(r);
    }
  }
  std::string p1 = fresh_dir("plab_jsonl") + ".jsonl";
  write_jsonl(log, p1);
  RunLog back = read_jsonl(p1);
  std::string p2 = p1 + ".again";
  write_jsonl(back, p2);
  CHECK(read_bytes(p1) == read_bytes(p2));
  CHECK(back.records.size() == log.records.size());
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("cached_train reuses a completed run byte-identically") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  std::string root = fresh_dir("plab_cache");
  TrainResult first = cached_train(cfg.train, root);
  std::string jsonl = run_dir_for(cfg.train, root) + "/metrics.jsonl";
  REQUIRE(fs::exists(jsonl));
  std::string bytes = read_bytes(jsonl);
  auto stamp = fs::last_write_time(jsonl);

  TrainResult second = cached_train(cfg.train, root);
  CHECK(fs::last_write_time(jsonl) == stamp);  // not retrained
  CHECK(read_bytes(jsonl) == bytes);
  REQUIRE(second.reports.size() == first.reports.size());
  CHECK(second.reports[0].t_plateau == first.reports[0].t_plateau);
  CHECK(second.log.records.size() == first.log.records.size());
  fs::remove_all(root);
}

TEST_CASE("emit_plot writes an SVG and rejects unknown metrics") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  std::string root = fresh_dir("plab_plot");
  cached_train(cfg.train, root);
  std::string jsonl = run_dir_for(cfg.train, root) + "/metrics.jsonl";
  std::string svg = root + "/loss.svg";
  emit_plot(jsonl, "train_loss", svg);
  std::string bytes = read_bytes(svg);
  CHECK(bytes.substr(0, 4) == "<svg");
  CHECK(bytes.find("</svg>") != std::string::npos);
  CHECK_THROWS_WITH_AS(emit_plot(jsonl, "banana", svg),
                       doctest::Contains("train_loss"), std::invalid_argument);
  fs::remove_all(root);
}

TEST_CASE("sweep enumerates subsets and aggregates by inclusion") {
  ExperimentConfig cfg = parse_experiment_config(kTinyConfig);
  cfg.kind = ExperimentKind::Sweep;
  cfg.task_pool = {make_task(TaskKind::LinearRegression, 3, 1.0),
                   make_task(TaskKind::SparseParity, 3, 0.0, 2)};
  cfg.max_subset = 2;
  cfg.seeds = {1};
  cfg.train.norm_mode = "auto";
  cfg.train.norm_samples = 2000;
  cfg.train.c_manual.clear();
  cfg.out_dir = fresh_dir("plab_sweep");
  SweepResult res = run_sweep(cfg);
  // Subsets {lr}, {sp2}, {lr, sp2} -> 1 + 1 + 2 rows.
  CHECK(res.rows.size() == 4);
  int size1 = 0, size2 = 0;
  for (const auto& a : res.aggregate) {
    CHECK(a.runs == 1);
    (a.subset_size == 1 ? size1 : size2)++;
  }
  CHECK(size1 == 2);
  CHECK(size2 == 2);
  write_sweep_csv(res, cfg.out_dir + "/rows.csv", cfg.out_dir + "/agg.csv");
  std::string rows = read_bytes(cfg.out_dir + "/rows.csv");
  CHECK(rows.find("subset,task,seed") == 0);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("feature learning driver emits one row per seed") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::FeatureLearning;
  cfg.seeds = {1, 2};
  cfg.fl.net = {10, 2, 4, 2, 0.05, true};
  cfg.fl.batch = 8;
  cfg.fl.steps = 60;
  auto rows = run_feature_learning(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].seed == 1);
  CHECK(rows[1].seed == 2);
}
