#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plab/checkpoint.hpp"
#include "plab/featurenet.hpp"
#include "plab/metrics.hpp"
#include "plab/oracle.hpp"
#include "plab/runlog.hpp"
#include "plab/task.hpp"
#include "plab/taskgen.hpp"
#include "plab/transformer.hpp"

namespace plab {

struct TrainConfig {
  MixtureSpec mixture;
  std::string profile = "toy";  // "toy": 4 layers / 64 embed / 4 heads; "paper": 12/256/8
  int n = 40;
  int batch = 64;
  long long steps = 20000;
  double lr = 3e-4;
  int eval_cadence = 25;
  int eval_batch = 256;
  std::string norm_mode = "auto";  // "auto" | "manual"
  std::vector<double> c_manual;
  long long norm_samples = 1000000;
  std::uint64_t seed = 1;
  long long checkpoint_every = 0;  // 0: only escape + final checkpoints
  bool stop_after_exit = true;     // stop once every task escaped and exited
  bool log_timing = false;
  std::string out_dir;  // empty: keep everything in memory

  static TrainConfig toy(MixtureSpec mix, std::uint64_t seed);
  static TrainConfig paper(MixtureSpec mix, std::uint64_t seed);
  void validate() const;
  TransformerConfig model_config() const;
  // Digest of every semantically relevant field; keys run caches and guards
  // checkpoint/config pairing.
  std::uint64_t digest() const;
};

// c_m per mixture entry: manual passthrough or the cached once-per-run
// Monte-Carlo estimate (1/E[loss(g*)], norm_samples draws).
std::vector<double> resolve_normalization(const TrainConfig& cfg);

struct TrainResult {
  RunLog log;
  std::vector<EscapeReport> reports;  // per mixture entry
  std::vector<double> c;
  long long last_step = 0;
};

TrainResult train_icl(const TrainConfig& cfg);
// Checkpoint transfer: model params copied, Adam state zeroed, RNG reseeded
// from cfg.seed. Shape mismatch -> std::invalid_argument.
TrainResult train_icl_transfer(const TrainConfig& cfg, const Checkpoint& source);
// Bit-exact continuation of an interrupted run of the same config.
TrainResult train_icl_resume(const TrainConfig& cfg, const Checkpoint& ckpt);

// Mean over the eval batch of the last-position metric: squared error
// (continuous) or sign-match accuracy (boolean), plus the NC-distance between
// the last-position predictions and the no-context oracle.
struct LastPositionEval {
  double metric = 0.0;
  double nc_dist = 0.0;
};
LastPositionEval evaluate_last_position(const Transformer<float>& model,
                                        const MixtureSpec& mix, int entry, int n,
                                        int count, Rng& rng, const TableSet& tables,
                                        const NoContextOracle& oracle);

// ---- two-layer feature-learning experiment ----

struct FeatureTrainConfig {
  FeatureNetConfig net;
  double lr = 1e-3;
  int batch = 512;
  long long steps = 50000;
  std::uint64_t seed = 1;
  bool stop_on_escape = true;
  std::uint64_t digest() const;
};

struct FeatureTrainResult {
  LossStream loss;
  std::optional<long long> escape_step;
  double plateau_level = 0.0;  // mean loss over steps 200..400
};

FeatureTrainResult train_featurenet(const FeatureTrainConfig& cfg);

// The feature net's plateau height is not normalized to 1, so its detector
// triggers when the trailing 100-step mean drops below
// threshold_frac * (mean loss over steps 200..400), scanning t > 400.
std::optional<long long> featurenet_escape(const LossStream& stream,
                                           long long budget,
                                           double threshold_frac = 0.8,
                                           double* plateau_level = nullptr);

}  // namespace plab
