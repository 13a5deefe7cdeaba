#include "plab/xlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "plab/svg.hpp"

namespace plab {
namespace {

using nlohmann::json;

void check_fields(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object())
    throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key()))
      throw std::invalid_argument("unknown field \"" + item.key() + "\" in " +
                                  where);
  }
}

TaskSpec parse_task(const json& j, const std::string& where) {
  check_fields(j, {"task", "dim", "mu", "sparsity", "slope", "weight"}, where);
  if (!j.contains("task"))
    throw std::invalid_argument(where + " is missing \"task\"");
  TaskSpec spec;
  int sparsity = spec.sparsity;
  spec.kind = task_kind_from_name(j.at("task").get<std::string>(), &sparsity);
  spec.sparsity = sparsity;
  if (j.contains("dim")) spec.dim = j.at("dim").get<int>();
  if (j.contains("mu")) spec.mu = j.at("mu").get<double>();
  if (j.contains("sparsity")) spec.sparsity = j.at("sparsity").get<int>();
  if (j.contains("slope")) spec.slope = j.at("slope").get<double>();
  spec.validate();
  return spec;
}

void parse_train(const json& j, TrainConfig& cfg) {
  check_fields(j,
               {"profile", "mixture", "n", "batch", "steps", "lr",
                "eval_cadence", "eval_batch", "norm_mode", "c_manual",
                "norm_samples", "checkpoint_every", "stop_after_exit",
                "log_timing"},
               "train");
  if (j.contains("profile")) cfg.profile = j.at("profile").get<std::string>();
  if (j.contains("mixture")) {
    cfg.mixture.entries.clear();
    for (const auto& t : j.at("mixture")) {
      MixtureSpec::Entry e;
      e.task = parse_task(t, "train.mixture entry");
      e.weight = t.contains("weight")
                     ? t.at("weight").get<double>()
                     : 1.0 / j.at("mixture").size();
      cfg.mixture.entries.push_back(e);
    }
  }
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("batch")) cfg.batch = j.at("batch").get<int>();
  if (j.contains("steps")) cfg.steps = j.at("steps").get<long long>();
  if (j.contains("lr")) cfg.lr = j.at("lr").get<double>();
  if (j.contains("eval_cadence")) cfg.eval_cadence = j.at("eval_cadence").get<int>();
  if (j.contains("eval_batch")) cfg.eval_batch = j.at("eval_batch").get<int>();
  if (j.contains("norm_mode")) cfg.norm_mode = j.at("norm_mode").get<std::string>();
  if (j.contains("c_manual"))
    cfg.c_manual = j.at("c_manual").get<std::vector<double>>();
  if (j.contains("norm_samples"))
    cfg.norm_samples = j.at("norm_samples").get<long long>();
  if (j.contains("checkpoint_every"))
    cfg.checkpoint_every = j.at("checkpoint_every").get<long long>();
  if (j.contains("stop_after_exit"))
    cfg.stop_after_exit = j.at("stop_after_exit").get<bool>();
  if (j.contains("log_timing")) cfg.log_timing = j.at("log_timing").get<bool>();
}

void parse_fl(const json& j, FeatureTrainConfig& cfg) {
  check_fields(j, {"d", "h", "hp", "k", "mode", "init_scale", "lr", "batch",
                   "steps"},
               "fl");
  if (j.contains("d")) cfg.net.d = j.at("d").get<int>();
  if (j.contains("h")) cfg.net.h = j.at("h").get<int>();
  if (j.contains("hp")) cfg.net.hp = j.at("hp").get<int>();
  if (j.contains("k")) cfg.net.k = j.at("k").get<int>();
  if (j.contains("mode")) {
    std::string mode = j.at("mode").get<std::string>();
    if (mode != "single" && mode != "multi")
      throw std::invalid_argument("fl.mode must be \"single\" or \"multi\"");
    cfg.net.multi_task = mode == "multi";
  }
  if (j.contains("init_scale")) cfg.net.init_scale = j.at("init_scale").get<double>();
  if (j.contains("lr")) cfg.lr = j.at("lr").get<double>();
  if (j.contains("batch")) cfg.batch = j.at("batch").get<int>();
  if (j.contains("steps")) cfg.steps = j.at("steps").get<long long>();
}

ExperimentKind kind_from_name(const std::string& name) {
  if (name == "single_run") return ExperimentKind::SingleRun;
  if (name == "sweep") return ExperimentKind::Sweep;
  if (name == "uneven") return ExperimentKind::Uneven;
  if (name == "transfer") return ExperimentKind::Transfer;
  if (name == "retrieval_transfer") return ExperimentKind::RetrievalTransfer;
  if (name == "feature_learning") return ExperimentKind::FeatureLearning;
  throw std::invalid_argument("unknown experiment kind \"" + name + "\"");
}

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SingleRun: return "single_run";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Uneven: return "uneven";
    case ExperimentKind::Transfer: return "transfer";
    case ExperimentKind::RetrievalTransfer: return "retrieval_transfer";
    case ExperimentKind::FeatureLearning: return "feature_learning";
  }
  return "single_run";
}

std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string subset_label(const MixtureSpec& mix) {
  std::string out;
  for (const auto& e : mix.entries) {
    if (!out.empty()) out += "+";
    out += e.task.name();
  }
  return out;
}

// Recover per-task streams and reports from a persisted metrics.jsonl so a
// cached run is indistinguishable from a fresh one.
TrainResult result_from_log(const TrainConfig& cfg, RunLog log) {
  const std::size_t k = cfg.mixture.entries.size();
  std::vector<LossStream> train_s(k), eval_s(k);
  for (const auto& r : log.records) {
    train_s[r.task].push(r.step, r.loss_norm);
    if (!std::isnan(r.eval)) eval_s[r.task].push(r.step, r.eval);
  }
  TrainResult res;
  res.log = std::move(log);
  res.last_step = train_s.empty() || train_s[0].size() == 0
                      ? 0
                      : train_s[0].steps.back();
  for (std::size_t m = 0; m < k; ++m)
    res.reports.push_back(escape_report(train_s[m], eval_s[m],
                                        cfg.mixture.entries[m].task.modality(),
                                        cfg.steps));
  return res;
}

// Integer-count mixtures require batch % tasks == 0; sweeps round the batch
// up to the next multiple so every subset size is runnable.
int adjusted_batch(int batch, int tasks) {
  return ((batch + tasks - 1) / tasks) * tasks;
}

TrainConfig single_task_config(const TrainConfig& base, const TaskSpec& task,
                               std::uint64_t seed) {
  TrainConfig cfg = base;
  cfg.mixture = MixtureSpec::even({task});
  cfg.seed = seed;
  cfg.out_dir.clear();
  return cfg;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("seeds must be non-empty");
  for (const auto& t : task_pool) t.validate();
  if (kind != ExperimentKind::FeatureLearning &&
      kind != ExperimentKind::SingleRun && task_pool.empty() &&
      train.mixture.entries.empty())
    throw std::invalid_argument("experiment needs a task pool or a mixture");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j = json::parse(json_text);
  check_fields(j, {"experiment", "train", "tasks", "seeds", "out", "max_subset",
                   "fl"},
               "experiment config");
  ExperimentConfig cfg;
  if (j.contains("experiment"))
    cfg.kind = kind_from_name(j.at("experiment").get<std::string>());
  if (j.contains("train")) parse_train(j.at("train"), cfg.train);
  if (j.contains("tasks"))
    for (const auto& t : j.at("tasks"))
      cfg.task_pool.push_back(parse_task(t, "tasks entry"));
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  if (j.contains("max_subset")) cfg.max_subset = j.at("max_subset").get<int>();
  if (j.contains("fl")) parse_fl(j.at("fl"), cfg.fl);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = kind_name(cfg.kind);
  json train;
  train["profile"] = cfg.train.profile;
  json mix = json::array();
  for (const auto& e : cfg.train.mixture.entries) {
    json t;
    t["task"] = e.task.name();
    t["dim"] = e.task.dim;
    t["mu"] = e.task.mu;
    t["sparsity"] = e.task.sparsity;
    t["slope"] = e.task.slope;
    t["weight"] = e.weight;
    mix.push_back(t);
  }
  train["mixture"] = mix;
  train["n"] = cfg.train.n;
  train["batch"] = cfg.train.batch;
  train["steps"] = cfg.train.steps;
  train["lr"] = cfg.train.lr;
  train["eval_cadence"] = cfg.train.eval_cadence;
  train["eval_batch"] = cfg.train.eval_batch;
  train["norm_mode"] = cfg.train.norm_mode;
  if (!cfg.train.c_manual.empty()) train["c_manual"] = cfg.train.c_manual;
  train["norm_samples"] = cfg.train.norm_samples;
  j["train"] = train;
  json tasks = json::array();
  for (const auto& t : cfg.task_pool) {
    json tj;
    tj["task"] = t.name();
    tj["dim"] = t.dim;
    tj["mu"] = t.mu;
    tj["sparsity"] = t.sparsity;
    tj["slope"] = t.slope;
    tasks.push_back(tj);
  }
  j["tasks"] = tasks;
  j["seeds"] = cfg.seeds;
  j["out"] = cfg.out_dir;
  j["max_subset"] = cfg.max_subset;
  json fl;
  fl["d"] = cfg.fl.net.d;
  fl["h"] = cfg.fl.net.h;
  fl["hp"] = cfg.fl.net.hp;
  fl["k"] = cfg.fl.net.k;
  fl["mode"] = cfg.fl.net.multi_task ? "multi" : "single";
  fl["lr"] = cfg.fl.lr;
  fl["batch"] = cfg.fl.batch;
  fl["steps"] = cfg.fl.steps;
  j["fl"] = fl;
  return j.dump(2) + "\n";
}

std::string run_dir_for(const TrainConfig& cfg, const std::string& cache_root) {
  return cache_root + "/run-" + hex16(cfg.digest()) + "-s" +
         std::to_string(cfg.seed);
}

TrainResult cached_train(const TrainConfig& cfg, const std::string& cache_root) {
  TrainConfig run_cfg = cfg;
  run_cfg.out_dir = run_dir_for(cfg, cache_root);
  std::string done = run_cfg.out_dir + "/metrics.jsonl";
  if (std::filesystem::exists(done))
    return result_from_log(run_cfg, read_jsonl(done));
  TrainResult res = train_icl(run_cfg);
  // c is dropped by the cache path; zero it here too so cached and fresh
  // results compare equal field by field.
  res.c.clear();
  return res;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& pool = cfg.task_pool;
  int max_size = cfg.max_subset > 0
                     ? std::min<int>(cfg.max_subset, static_cast<int>(pool.size()))
                     : static_cast<int>(pool.size());
  std::vector<std::vector<TaskSpec>> subsets;
  if (cfg.max_subset == 0) {
    subsets.push_back(pool);
  } else {
    for (unsigned mask = 1; mask < (1u << pool.size()); ++mask) {
      std::vector<TaskSpec> subset;
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (mask & (1u << i)) subset.push_back(pool[i]);
      if (static_cast<int>(subset.size()) <= max_size) subsets.push_back(subset);
    }
  }

  SweepResult result;
  for (const auto& subset : subsets) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig run_cfg = cfg.train;
      run_cfg.mixture = MixtureSpec::even(subset);
      run_cfg.batch = adjusted_batch(cfg.train.batch,
                                     static_cast<int>(subset.size()));
      run_cfg.seed = seed;
      run_cfg.out_dir.clear();
      std::string label = subset_label(run_cfg.mixture);
      try {
        TrainResult res = cached_train(run_cfg, cfg.out_dir);
        for (std::size_t m = 0; m < subset.size(); ++m) {
          SweepRow row;
          row.subset = label;
          row.task = subset[m].name();
          row.seed = seed;
          row.report = res.reports[m];
          result.rows.push_back(row);
        }
      } catch (const std::exception& e) {
        for (const auto& t : subset) {
          SweepRow row;
          row.subset = label;
          row.task = t.name();
          row.seed = seed;
          row.error = e.what();
          result.rows.push_back(row);
        }
      }
    }
  }

  // Table-1-style aggregation: per subset size and task, the mean escape/exit
  // time across every run that contained the task.
  std::map<std::pair<int, std::string>, SweepAggregate> agg;
  for (const auto& row : result.rows) {
    if (!row.error.empty()) continue;
    int size = 1 + static_cast<int>(std::count(row.subset.begin(),
                                               row.subset.end(), '+'));
    auto& a = agg[{size, row.task}];
    a.subset_size = size;
    a.task = row.task;
    ++a.runs;
    if (row.report.t_plateau) {
      ++a.escaped;
      a.mean_t_plateau += static_cast<double>(*row.report.t_plateau);
    }
    if (row.report.t_exit) {
      ++a.exited;
      a.mean_t_exit += static_cast<double>(*row.report.t_exit);
    }
  }
  for (auto& [key, a] : agg) {
    if (a.escaped) a.mean_t_plateau /= a.escaped;
    if (a.exited) a.mean_t_exit /= a.exited;
    result.aggregate.push_back(a);
  }
  return result;
}

SweepResult run_uneven(const ExperimentConfig& cfg) {
  cfg.validate();
  MixtureSpec mix = cfg.train.mixture;
  if (mix.entries.empty()) {
    if (cfg.task_pool.size() < 2)
      throw std::invalid_argument("uneven experiment needs at least 2 tasks");
    // Default uneven split: half the batch to the first task, the rest even.
    double rest = 0.5 / (cfg.task_pool.size() - 1);
    for (std::size_t i = 0; i < cfg.task_pool.size(); ++i)
      mix.entries.push_back({cfg.task_pool[i], i == 0 ? 0.5 : rest});
  }
  mix.validate();

  SweepResult result;
  for (std::uint64_t seed : cfg.seeds) {
    TrainConfig run_cfg = cfg.train;
    run_cfg.mixture = mix;
    run_cfg.seed = seed;
    run_cfg.out_dir.clear();
    TrainResult res = cached_train(run_cfg, cfg.out_dir);
    for (std::size_t m = 0; m < mix.entries.size(); ++m) {
      SweepRow row;
      row.subset = "uneven:" + subset_label(mix);
      row.task = mix.entries[m].task.name();
      row.seed = seed;
      row.report = res.reports[m];
      result.rows.push_back(row);
    }
    // Matched single-task baselines.
    for (const auto& e : mix.entries) {
      TrainConfig base_cfg = single_task_config(cfg.train, e.task, seed);
      TrainResult res1 = cached_train(base_cfg, cfg.out_dir);
      SweepRow row;
      row.subset = "single";
      row.task = e.task.name();
      row.seed = seed;
      row.report = res1.reports[0];
      result.rows.push_back(row);
    }
  }
  return result;
}

std::vector<TransferCell> run_transfer(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TransferCell> cells;
  for (std::uint64_t seed : cfg.seeds) {
    for (const auto& src : cfg.task_pool) {
      TrainConfig src_cfg = single_task_config(cfg.train, src, seed);
      cached_train(src_cfg, cfg.out_dir);
      std::string ckpt_path = run_dir_for(src_cfg, cfg.out_dir) + "/escape-" +
                              src.name() + ".ckpt";
      bool have_ckpt = std::filesystem::exists(ckpt_path);
      for (const auto& dst : cfg.task_pool) {
        TransferCell cell;
        cell.from = src.name();
        cell.to = dst.name();
        cell.seed = seed;
        TrainConfig dst_cfg = single_task_config(cfg.train, dst, seed);
        TrainResult scratch = cached_train(dst_cfg, cfg.out_dir);
        cell.scratch_t = scratch.reports[0].t_plateau;
        if (!have_ckpt) {
          cell.skip_reason = "no escape checkpoint for " + src.name() +
                             " (never escaped within budget)";
          cells.push_back(cell);
          continue;
        }
        TrainConfig tr_cfg = dst_cfg;
        tr_cfg.out_dir = cfg.out_dir + "/transfer-" + src.name() + "-" +
                         hex16(dst_cfg.digest()) + "-s" + std::to_string(seed);
        std::string done = tr_cfg.out_dir + "/metrics.jsonl";
        TrainResult transferred =
            std::filesystem::exists(done)
                ? result_from_log(tr_cfg, read_jsonl(done))
                : train_icl_transfer(tr_cfg, load_checkpoint(ckpt_path));
        cell.transfer_t = transferred.reports[0].t_plateau;
        if (cell.scratch_t && cell.transfer_t)
          cell.ratio = static_cast<double>(*cell.transfer_t) /
                       static_cast<double>(*cell.scratch_t);
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

std::vector<TransferCell> run_retrieval_transfer(const ExperimentConfig& cfg) {
  cfg.validate();
  int dim = cfg.task_pool.empty() ? cfg.train.mixture.entries.front().task.dim
                                  : cfg.task_pool.front().dim;
  TaskSpec gret = make_task(TaskKind::GaussianRetrieval, dim);
  TaskSpec bret = make_task(TaskKind::BooleanRetrieval, dim);
  std::vector<TransferCell> cells;
  for (std::uint64_t seed : cfg.seeds) {
    std::map<Modality, std::string> source_ckpt;
    std::map<Modality, std::string> source_name;
    for (const TaskSpec& src : {gret, bret}) {
      TrainConfig src_cfg = single_task_config(cfg.train, src, seed);
      cached_train(src_cfg, cfg.out_dir);
      source_ckpt[src.modality()] =
          run_dir_for(src_cfg, cfg.out_dir) + "/final.ckpt";
      source_name[src.modality()] = src.name();
    }
    for (const auto& dst : cfg.task_pool) {
      TransferCell cell;
      cell.from = source_name[dst.modality()];
      cell.to = dst.name();
      cell.seed = seed;
      TrainConfig dst_cfg = single_task_config(cfg.train, dst, seed);
      TrainResult scratch = cached_train(dst_cfg, cfg.out_dir);
      cell.scratch_t = scratch.reports[0].t_plateau;
      std::string ckpt_path = source_ckpt[dst.modality()];
      if (!std::filesystem::exists(ckpt_path)) {
        cell.skip_reason = "no retrieval checkpoint at " + ckpt_path;
        cells.push_back(cell);
        continue;
      }
      TrainConfig tr_cfg = dst_cfg;
      tr_cfg.out_dir = cfg.out_dir + "/rtransfer-" + cell.from + "-" +
                       hex16(dst_cfg.digest()) + "-s" + std::to_string(seed);
      std::string done = tr_cfg.out_dir + "/metrics.jsonl";
      TrainResult transferred =
          std::filesystem::exists(done)
              ? result_from_log(tr_cfg, read_jsonl(done))
              : train_icl_transfer(tr_cfg, load_checkpoint(ckpt_path));
      cell.transfer_t = transferred.reports[0].t_plateau;
      if (cell.scratch_t && cell.transfer_t)
        cell.ratio = static_cast<double>(*cell.transfer_t) /
                     static_cast<double>(*cell.scratch_t);
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<FeatureLearningRow> run_feature_learning(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<FeatureLearningRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    FeatureLearningRow row;
    row.net = cfg.fl.net;
    row.seed = seed;
    for (bool multi : {false, true}) {
      FeatureTrainConfig run_cfg = cfg.fl;
      run_cfg.net.multi_task = multi;
      run_cfg.seed = seed;
      FeatureTrainResult res = train_featurenet(run_cfg);
      (multi ? row.multi_escape : row.single_escape) = res.escape_step;
    }
    if (row.single_escape && row.multi_escape)
      row.ratio = static_cast<double>(*row.multi_escape) /
                  static_cast<double>(*row.single_escape);
    rows.push_back(row);
  }
  return rows;
}

void emit_plot(const std::string& jsonl_path, const std::string& metric,
               const std::string& svg_path) {
  if (metric != "train_loss" && metric != "eval" && metric != "nc_dist")
    throw std::invalid_argument(
        "unknown metric \"" + metric +
        "\"; available metrics: train_loss, eval, nc_dist");
  RunLog log = read_jsonl(jsonl_path);
  std::size_t k = log.task_names.size();
  std::vector<LossStream> series(k), train_s(k);
  for (const auto& r : log.records) {
    train_s[r.task].push(r.step, r.loss_norm);
    if (metric == "train_loss") {
      series[r.task].push(r.step, r.loss_norm);
    } else if (metric == "eval") {
      if (!std::isnan(r.eval)) series[r.task].push(r.step, r.eval);
    } else {
      if (!std::isnan(r.nc_dist)) series[r.task].push(r.step, r.nc_dist);
    }
  }
  SvgPlot plot;
  plot.title = metric;
  plot.xlabel = "step";
  plot.ylabel = metric;
  plot.log_x = true;
  for (std::size_t m = 0; m < k; ++m) {
    SvgSeries s;
    s.label = log.task_names[m];
    s.dashed = metric != "train_loss";
    for (std::size_t i = 0; i < series[m].size(); ++i) {
      s.xs.push_back(static_cast<double>(series[m].steps[i]));
      s.ys.push_back(series[m].values[i]);
    }
    plot.series.push_back(std::move(s));
    long long budget = train_s[m].size() ? train_s[m].steps.back() : 0;
    if (auto t = plateau_escape_time(train_s[m], budget)) {
      SvgMarker mk;
      mk.x = static_cast<double>(*t);
      mk.label = log.task_names[m] + " escape";
      mk.color = svg_palette(m);
      plot.markers.push_back(mk);
    }
  }
  write_svg(plot, svg_path);
}

namespace {

std::string opt_str(const std::optional<long long>& v) {
  return v ? std::to_string(*v) : "";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

}  // namespace

void write_sweep_csv(const SweepResult& result, const std::string& rows_path,
                     const std::string& aggregate_path) {
  auto rows = open_out(rows_path);
  rows << "subset,task,seed,t_plateau,t_exit,formatted,error\n";
  for (const auto& r : result.rows)
    rows << r.subset << "," << r.task << "," << r.seed << ","
         << opt_str(r.report.t_plateau) << "," << opt_str(r.report.t_exit)
         << "," << (r.error.empty() ? r.report.format() : "") << "," << r.error
         << "\n";
  auto agg = open_out(aggregate_path);
  agg << "subset_size,task,runs,escaped,mean_t_plateau,exited,mean_t_exit\n";
  for (const auto& a : result.aggregate) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", a.mean_t_plateau);
    agg << a.subset_size << "," << a.task << "," << a.runs << "," << a.escaped
        << "," << (a.escaped ? buf : "") << "," << a.exited << ",";
    std::snprintf(buf, sizeof(buf), "%.1f", a.mean_t_exit);
    agg << (a.exited ? buf : "") << "\n";
  }
}

void write_transfer_csv(const std::vector<TransferCell>& cells,
                        const std::string& path) {
  auto f = open_out(path);
  f << "from,to,seed,scratch_t_plateau,transfer_t_plateau,ratio,skip_reason\n";
  for (const auto& c : cells) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", c.ratio);
    f << c.from << "," << c.to << "," << c.seed << "," << opt_str(c.scratch_t)
      << "," << opt_str(c.transfer_t) << ","
      << ((c.scratch_t && c.transfer_t) ? buf : "") << "," << c.skip_reason
      << "\n";
  }
}

void write_feature_learning_csv(const std::vector<FeatureLearningRow>& rows,
                                const std::string& path) {
  auto f = open_out(path);
  f << "d,h,hp,k,seed,single_escape,multi_escape,ratio\n";
  for (const auto& r : rows) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", r.ratio);
    f << r.net.d << "," << r.net.h << "," << r.net.hp << "," << r.net.k << ","
      << r.seed << "," << opt_str(r.single_escape) << ","
      << opt_str(r.multi_escape) << ","
      << ((r.single_escape && r.multi_escape) ? buf : "") << "\n";
  }
}

}  // namespace plab
