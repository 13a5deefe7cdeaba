#include "plab/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "plab/adam.hpp"
#include "plab/nnops.hpp"

namespace plab {
namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_str(std::uint64_t h, const std::string& s) {
  return fnv1a(h, s.data(), s.size());
}

template <typename T>
std::uint64_t fnv1a_pod(std::uint64_t h, T v) {
  return fnv1a(h, &v, sizeof(v));
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::string entry_key(const char* prefix, int m, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s.%d.%s", prefix, m, suffix);
  return buf;
}

}  // namespace

TrainConfig TrainConfig::toy(MixtureSpec mix, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.mixture = std::move(mix);
  cfg.profile = "toy";
  cfg.n = 40;
  cfg.lr = 3e-4;
  cfg.eval_cadence = 25;
  cfg.eval_batch = 256;
  cfg.seed = seed;
  return cfg;
}

TrainConfig TrainConfig::paper(MixtureSpec mix, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.mixture = std::move(mix);
  cfg.profile = "paper";
  cfg.n = 120;
  cfg.lr = 1e-4;
  cfg.eval_cadence = 100;
  cfg.eval_batch = 1024;
  cfg.steps = 500000;
  cfg.seed = seed;
  return cfg;
}

void TrainConfig::validate() const {
  mixture.validate();
  if (profile != "toy" && profile != "paper")
    throw std::invalid_argument("profile must be \"toy\" or \"paper\"");
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (batch < 1) throw std::invalid_argument("batch must be positive");
  if (steps < 0) throw std::invalid_argument("steps must be non-negative");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (eval_cadence < 1) throw std::invalid_argument("eval_cadence must be positive");
  if (eval_batch < 1) throw std::invalid_argument("eval_batch must be positive");
  if (norm_mode != "auto" && norm_mode != "manual")
    throw std::invalid_argument("norm_mode must be \"auto\" or \"manual\"");
  if (norm_mode == "manual" && c_manual.size() != mixture.entries.size())
    throw std::invalid_argument("c_manual must have one entry per mixture task");
  int dim = mixture.entries.front().task.dim;
  for (const auto& e : mixture.entries)
    if (e.task.dim != dim)
      throw std::invalid_argument("all mixture tasks must share one input dim");
  (void)mixture.counts(batch);
}

TransformerConfig TrainConfig::model_config() const {
  int dim = mixture.entries.front().task.dim;
  return (profile == "paper") ? TransformerConfig::paper_profile(dim, n)
                              : TransformerConfig::toy_profile(dim, n);
}

std::uint64_t TrainConfig::digest() const {
  std::uint64_t h = kFnvOffset;
  h = fnv1a_str(h, profile);
  for (const auto& e : mixture.entries) {
    h = fnv1a_str(h, e.task.name());
    h = fnv1a_pod(h, e.task.dim);
    h = fnv1a_pod(h, e.task.mu);
    h = fnv1a_pod(h, e.task.sparsity);
    h = fnv1a_pod(h, e.task.slope);
    h = fnv1a_pod(h, e.weight);
  }
  h = fnv1a_pod(h, n);
  h = fnv1a_pod(h, batch);
  h = fnv1a_pod(h, steps);
  h = fnv1a_pod(h, lr);
  h = fnv1a_pod(h, eval_cadence);
  h = fnv1a_pod(h, eval_batch);
  h = fnv1a_str(h, norm_mode);
  for (double c : c_manual) h = fnv1a_pod(h, c);
  h = fnv1a_pod(h, norm_samples);
  h = fnv1a_pod(h, seed);
  return h;
}

std::uint64_t FeatureTrainConfig::digest() const {
  std::uint64_t h = fnv1a_str(kFnvOffset, "featurenet");
  h = fnv1a_pod(h, net.d);
  h = fnv1a_pod(h, net.h);
  h = fnv1a_pod(h, net.hp);
  h = fnv1a_pod(h, net.k);
  h = fnv1a_pod(h, net.init_scale);
  h = fnv1a_pod(h, static_cast<int>(net.multi_task));
  h = fnv1a_pod(h, lr);
  h = fnv1a_pod(h, batch);
  h = fnv1a_pod(h, steps);
  h = fnv1a_pod(h, seed);
  return h;
}

std::vector<double> resolve_normalization(const TrainConfig& cfg) {
  if (cfg.norm_mode == "manual") return cfg.c_manual;
  std::vector<double> c;
  c.reserve(cfg.mixture.entries.size());
  for (std::size_t m = 0; m < cfg.mixture.entries.size(); ++m) {
    const TaskSpec& spec = cfg.mixture.entries[m].task;
    // Normalization is a property of the task alone; a fixed RNG keeps c_m
    // identical across seeds so normalized losses are comparable.
    Rng rng(0x706c61624e6f726dULL, 31 + static_cast<std::uint64_t>(m));
    long long samples = cfg.norm_samples;
    if (spec.kind == TaskKind::LeakyReLURegression)
      samples = std::min<long long>(samples, 20000);  // nested MC inside
    c.push_back(normalization_constant(spec, samples, rng).c);
  }
  return c;
}

LastPositionEval evaluate_last_position(const Transformer<float>& model,
                                        const MixtureSpec& mix, int entry, int n,
                                        int count, Rng& rng, const TableSet& tables,
                                        const NoContextOracle& oracle) {
  const TaskSpec& spec = mix.entries[entry].task;
  const bool boolean = spec.modality() == Modality::Boolean;
  TransformerActs<float> acts;
  std::vector<float> tokens;
  double metric_sum = 0.0;
  double nc_sum = 0.0;
  for (int b = 0; b < count; ++b) {
    PromptSequence seq;
    if (spec.is_retrieval()) {
      seq = build_retrieval_prompt(tables.table(entry), n, rng).prompt;
    } else {
      FunctionSample fn = sample_function(spec, rng);
      seq = build_prompt(spec, fn, n, rng);
    }
    seq.task_id = entry;
    tokens = embed_prompt<float>(seq);
    std::vector<float> preds = model.forward(tokens.data(), 2 * seq.n, acts);
    double pred = preds[seq.n - 1];
    double y = seq.ys[seq.n - 1];
    double g = oracle.eval(seq.x(seq.n - 1), spec.dim);
    if (boolean) {
      double s = pred >= 0.0 ? 1.0 : -1.0;
      double gs = g >= 0.0 ? 1.0 : -1.0;
      metric_sum += (s == y) ? 1.0 : 0.0;
      nc_sum += (s == gs) ? 0.0 : 1.0;
    } else {
      metric_sum += (pred - y) * (pred - y);
      nc_sum += (pred - g) * (pred - g);
    }
  }
  LastPositionEval out;
  out.metric = metric_sum / count;
  out.nc_dist = nc_sum / count;
  return out;
}

namespace {

struct IclState {
  Transformer<float> model;
  AdamState<float> adam;
  Rng base;
  long long step = 0;  // completed steps
  std::vector<LossStream> train_s, eval_s, nc_s;

  IclState(const TransformerConfig& mc, std::uint64_t seed, std::size_t tasks)
      : model(mc), base(seed, 0x1c1), train_s(tasks), eval_s(tasks), nc_s(tasks) {}
};

Checkpoint make_checkpoint(const TrainConfig& cfg, const IclState& st) {
  Checkpoint ck;
  ck.config_digest = cfg.digest();
  ck.add_i64("step", st.step);
  ck.add_i64("adam.step", st.adam.step);
  ck.add_u64("rng.key", st.base.key());
  ck.add_u64("rng.counter", st.base.counter());
  const auto& ps = st.model.params();
  for (const auto& e : ps.entries) {
    std::vector<std::uint32_t> shape(e.shape.begin(), e.shape.end());
    ck.add_f32("param." + e.name, ps.values.data() + e.offset, shape);
  }
  ck.add_f32("adam.m", st.adam.m.data(),
             {static_cast<std::uint32_t>(st.adam.m.size())});
  ck.add_f32("adam.v", st.adam.v.data(),
             {static_cast<std::uint32_t>(st.adam.v.size())});
  auto add_stream = [&ck](const std::string& name, const LossStream& s) {
    std::vector<double> steps(s.steps.begin(), s.steps.end());
    ck.add_f64(name + ".steps", steps.data(),
               {static_cast<std::uint32_t>(steps.size())});
    ck.add_f64(name + ".values", s.values.data(),
               {static_cast<std::uint32_t>(s.values.size())});
  };
  for (std::size_t m = 0; m < st.train_s.size(); ++m) {
    int mi = static_cast<int>(m);
    add_stream(entry_key("train", mi, "s"), st.train_s[m]);
    add_stream(entry_key("eval", mi, "s"), st.eval_s[m]);
    add_stream(entry_key("nc", mi, "s"), st.nc_s[m]);
  }
  return ck;
}

LossStream read_stream(const Checkpoint& ck, const std::string& name) {
  LossStream s;
  for (double v : ck.f64(name + ".steps"))
    s.steps.push_back(static_cast<long long>(v));
  s.values = ck.f64(name + ".values");
  return s;
}

void restore_state(const TrainConfig& cfg, const Checkpoint& ck, IclState& st) {
  if (ck.config_digest != cfg.digest())
    throw std::invalid_argument("checkpoint was written by a different config");
  st.step = ck.i64("step");
  st.adam.step = ck.i64("adam.step");
  st.base.restore(ck.u64("rng.key"), ck.u64("rng.counter"));
  auto& ps = st.model.params();
  for (const auto& e : ps.entries) {
    const std::vector<float>& v = ck.f32("param." + e.name);
    if (v.size() != e.size)
      throw std::invalid_argument("checkpoint field param." + e.name +
                                  " has the wrong size");
    std::copy(v.begin(), v.end(), ps.values.begin() + e.offset);
  }
  st.adam.m = ck.f32("adam.m");
  st.adam.v = ck.f32("adam.v");
  if (st.adam.m.size() != ps.values.size() || st.adam.v.size() != ps.values.size())
    throw std::invalid_argument("checkpoint Adam state has the wrong size");
  for (std::size_t m = 0; m < st.train_s.size(); ++m) {
    int mi = static_cast<int>(m);
    st.train_s[m] = read_stream(ck, entry_key("train", mi, "s"));
    st.eval_s[m] = read_stream(ck, entry_key("eval", mi, "s"));
    st.nc_s[m] = read_stream(ck, entry_key("nc", mi, "s"));
  }
}

void copy_params_only(const Checkpoint& ck, Transformer<float>& model) {
  auto& ps = model.params();
  for (const auto& e : ps.entries) {
    if (!ck.has("param." + e.name))
      throw std::invalid_argument("checkpoint is missing field param." + e.name);
    const std::vector<float>& v = ck.f32("param." + e.name);
    if (v.size() != e.size)
      throw std::invalid_argument("checkpoint field param." + e.name +
                                  " does not match the target model shape");
    std::copy(v.begin(), v.end(), ps.values.begin() + e.offset);
  }
}

void save_to(const TrainConfig& cfg, const IclState& st, const std::string& file) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::create_directories(cfg.out_dir);
  save_checkpoint(make_checkpoint(cfg, st), cfg.out_dir + "/" + file);
}

TrainResult run_icl(const TrainConfig& cfg, const Checkpoint* transfer_src,
                    const Checkpoint* resume_src) {
  cfg.validate();
  const std::size_t k = cfg.mixture.entries.size();
  IclState st(cfg.model_config(), cfg.seed, k);
  st.model.init(cfg.seed);
  st.adam.reset(st.model.params().values.size());
  st.adam.lr = cfg.lr;
  if (transfer_src) copy_params_only(*transfer_src, st.model);
  if (resume_src) restore_state(cfg, *resume_src, st);

  std::vector<double> c = resolve_normalization(cfg);
  std::vector<Modality> modality(k);
  std::vector<NoContextOracle> oracles;
  oracles.reserve(k);
  for (std::size_t m = 0; m < k; ++m) {
    modality[m] = cfg.mixture.entries[m].task.modality();
    // 2000 MC samples per query: only LeakyReLU's oracle is sampled, and at
    // 100k samples its NC-distance probe costs more than training itself.
    oracles.emplace_back(cfg.mixture.entries[m].task, 2000,
                         Rng(0x6f7261636c65ULL, 7 + m));
  }
  // Retrieval tables are part of the task definition, drawn once per run from
  // a stream that training never touches.
  Rng table_rng(cfg.seed, 0x7ab1e);
  TableSet tables(cfg.mixture, table_rng);

  std::vector<OnlineDetector> plateau_det, exit_det;
  std::vector<bool> escaped(k, false), exited(k, false);
  for (std::size_t m = 0; m < k; ++m) {
    plateau_det.emplace_back(0.8, true);
    bool boolean = modality[m] == Modality::Boolean;
    exit_det.emplace_back(boolean ? 0.95 : 0.2, !boolean);
  }
  // Replay logged streams through the detectors so resumed runs neither skip
  // nor repeat escape checkpoints.
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t i = 0; i < st.train_s[m].size(); ++i)
      plateau_det[m].push(st.train_s[m].steps[i], st.train_s[m].values[i]);
    for (std::size_t i = 0; i < st.eval_s[m].size(); ++i)
      exit_det[m].push(st.eval_s[m].steps[i], st.eval_s[m].values[i]);
    escaped[m] = plateau_det[m].fired().has_value();
    exited[m] = exit_det[m].fired().has_value();
  }

  RunLog log;
  for (const auto& e : cfg.mixture.entries) log.task_names.push_back(e.task.name());
  auto append_step_records = [&](long long t, const BatchLoss& bl, bool has_eval,
                                 const std::vector<LastPositionEval>& evals,
                                 double wall_ms) {
    for (std::size_t m = 0; m < k; ++m) {
      MetricsRecord r;
      r.step = t;
      r.task = static_cast<int>(m);
      r.loss_norm = c[m] * bl.per_task[m];
      if (has_eval) {
        r.eval = evals[m].metric;
        r.nc_dist = evals[m].nc_dist;
      }
      if (cfg.log_timing) r.wall_ms = wall_ms;
      log.records.push_back(r);
    }
  };
  // Rebuild the log from streams when resuming.
  if (resume_src) {
    for (long long i = 0; i < st.step; ++i) {
      long long t = st.train_s[0].steps[i];
      bool has_eval = t % cfg.eval_cadence == 0;
      for (std::size_t m = 0; m < k; ++m) {
        MetricsRecord r;
        r.step = t;
        r.task = static_cast<int>(m);
        r.loss_norm = st.train_s[m].values[i];
        if (has_eval) {
          long long ei = t / cfg.eval_cadence - 1;
          r.eval = st.eval_s[m].values[ei];
          r.nc_dist = st.nc_s[m].values[ei];
        }
        log.records.push_back(r);
      }
    }
  }

  std::vector<float> grad(st.model.params().values.size());
  for (long long step = st.step; step < cfg.steps; ++step) {
    const long long t = step + 1;
    auto t0 = std::chrono::steady_clock::now();
    Rng srng = st.base.substream(0x100000ULL + static_cast<std::uint64_t>(step));
    std::vector<PromptSequence> batch =
        build_batch(cfg.mixture, cfg.batch, cfg.n, srng, tables);
    std::fill(grad.begin(), grad.end(), 0.0f);
    BatchLoss bl =
        sequence_loss<float>(st.model, batch, c, modality, grad.data());
    adam_step(st.model.params(), grad.data(), st.adam);
    st.step = t;

    for (std::size_t m = 0; m < k; ++m) {
      double ln = c[m] * bl.per_task[m];
      st.train_s[m].push(t, ln);
      plateau_det[m].push(t, ln);
      if (plateau_det[m].fired() && !escaped[m]) {
        escaped[m] = true;
        save_to(cfg, st, "escape-" + cfg.mixture.entries[m].task.name() + ".ckpt");
      }
    }

    bool has_eval = t % cfg.eval_cadence == 0;
    std::vector<LastPositionEval> evals(k);
    if (has_eval) {
      Rng erng = st.base.substream(0x200000ULL + static_cast<std::uint64_t>(step));
      for (std::size_t m = 0; m < k; ++m) {
        evals[m] = evaluate_last_position(st.model, cfg.mixture,
                                          static_cast<int>(m), cfg.n,
                                          cfg.eval_batch, erng, tables,
                                          oracles[m]);
        // The 0.2 exit threshold presumes the height-1 normalized scale;
        // boolean accuracy is already scale-free.
        if (modality[m] == Modality::Continuous) evals[m].metric *= c[m];
        st.eval_s[m].push(t, evals[m].metric);
        st.nc_s[m].push(t, evals[m].nc_dist);
        exit_det[m].push(t, evals[m].metric);
        if (exit_det[m].fired()) exited[m] = true;
      }
    }
    double wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    append_step_records(t, bl, has_eval, evals, wall_ms);

    if (cfg.checkpoint_every > 0 && t % cfg.checkpoint_every == 0)
      save_to(cfg, st, "step-" + std::to_string(t) + ".ckpt");
    if (cfg.stop_after_exit &&
        std::all_of(escaped.begin(), escaped.end(), [](bool b) { return b; }) &&
        std::all_of(exited.begin(), exited.end(), [](bool b) { return b; }))
      break;
  }
  save_to(cfg, st, "final.ckpt");

  TrainResult res;
  res.log = std::move(log);
  res.c = c;
  res.last_step = st.step;
  for (std::size_t m = 0; m < k; ++m)
    res.reports.push_back(
        escape_report(st.train_s[m], st.eval_s[m], modality[m], cfg.steps));
  if (!cfg.out_dir.empty()) {
    write_jsonl(res.log, cfg.out_dir + "/metrics.jsonl", cfg.log_timing);
    std::vector<EscapeRow> rows;
    for (std::size_t m = 0; m < k; ++m) {
      EscapeRow row;
      row.label = cfg.profile;
      row.task = cfg.mixture.entries[m].task.name();
      row.seed = cfg.seed;
      row.report = res.reports[m];
      rows.push_back(row);
    }
    write_escape_csv(rows, cfg.out_dir + "/escape.csv");
  }
  return res;
}

}  // namespace

TrainResult train_icl(const TrainConfig& cfg) { return run_icl(cfg, nullptr, nullptr); }

TrainResult train_icl_transfer(const TrainConfig& cfg, const Checkpoint& source) {
  return run_icl(cfg, &source, nullptr);
}

TrainResult train_icl_resume(const TrainConfig& cfg, const Checkpoint& ckpt) {
  return run_icl(cfg, nullptr, &ckpt);
}

std::optional<long long> featurenet_escape(const LossStream& stream,
                                           long long budget,
                                           double threshold_frac,
                                           double* plateau_level) {
  double level_sum = 0.0;
  long long level_count = 0;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (stream.steps[i] >= 200 && stream.steps[i] <= 400) {
      level_sum += stream.values[i];
      ++level_count;
    }
  }
  if (level_count == 0) return std::nullopt;
  double level = level_sum / level_count;
  if (plateau_level) *plateau_level = level;
  double thr = threshold_frac * level;
  for (std::size_t i = kDetectorWindow; i < stream.size(); ++i) {
    if (stream.steps[i] <= 400 || stream.steps[i] > budget) continue;
    if (windowed_mean_at(stream, i, kDetectorWindow) < thr)
      return stream.steps[i];
  }
  return std::nullopt;
}

FeatureTrainResult train_featurenet(const FeatureTrainConfig& cfg) {
  if (cfg.batch < 1) throw std::invalid_argument("batch must be positive");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("lr must be positive");
  FeatureNet<float> net(cfg.net);
  net.init(cfg.seed);
  AdamState<float> adam;
  adam.reset(net.params().values.size());
  adam.lr = cfg.lr;
  Rng base(cfg.seed, 0xba7c4);

  FeatureTrainResult res;
  std::vector<float> grad(net.params().values.size());
  double level_sum = 0.0;
  double thr = -1.0;
  for (long long step = 0; step < cfg.steps; ++step) {
    const long long t = step + 1;
    Rng srng = base.substream(static_cast<std::uint64_t>(step));
    FeatureNet<float>::Mat X = net.sample_inputs(cfg.batch, srng);
    FeatureNet<float>::Mat Y = net.teacher(X);
    std::fill(grad.begin(), grad.end(), 0.0f);
    double loss = net.loss_and_grad(X, Y, grad.data());
    adam_step(net.params(), grad.data(), adam);
    res.loss.push(t, loss);
    if (t >= 200 && t <= 400) {
      level_sum += loss;
      if (t == 400) {
        res.plateau_level = level_sum / 201.0;
        thr = 0.8 * res.plateau_level;
      }
    }
    if (thr >= 0.0 && !res.escape_step && t > 400 &&
        windowed_mean_at(res.loss, res.loss.size() - 1) < thr) {
      res.escape_step = t;
      if (cfg.stop_on_escape) break;
    }
  }
  return res;
}

}  // namespace plab
