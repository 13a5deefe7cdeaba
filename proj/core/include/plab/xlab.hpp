#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plab/train.hpp"

namespace plab {

enum class ExperimentKind {
  SingleRun,
  Sweep,
  Uneven,
  Transfer,
  RetrievalTransfer,
  FeatureLearning,
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SingleRun;
  TrainConfig train;                 // template shared by every run
  std::vector<TaskSpec> task_pool;  // sweep/transfer candidates
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "runs";
  int max_subset = 0;  // 0: only the full pool as one mixture
  FeatureTrainConfig fl;

  void validate() const;
};

// JSON <-> config. Unknown fields anywhere in the document are rejected with
// an error naming the field.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_json(const ExperimentConfig& cfg);

// Runs train_icl, caching by (config digest, seed): when the run directory
// already holds a completed metrics.jsonl, the logs are loaded instead of
// retrained and are byte-identical to the first invocation.
TrainResult cached_train(const TrainConfig& cfg, const std::string& cache_root);
std::string run_dir_for(const TrainConfig& cfg, const std::string& cache_root);

struct SweepRow {
  std::string subset;  // "+"-joined task names
  std::string task;
  std::uint64_t seed = 0;
  EscapeReport report;
  std::string error;  // non-empty when the run faulted
};

struct SweepAggregate {
  int subset_size = 0;
  std::string task;
  int runs = 0;
  int escaped = 0;
  double mean_t_plateau = 0.0;  // over runs where t_plateau exists
  double mean_t_exit = 0.0;     // over runs where t_exit exists
  int exited = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregate;
};

SweepResult run_sweep(const ExperimentConfig& cfg);
SweepResult run_uneven(const ExperimentConfig& cfg);

struct TransferCell {
  std::string from;
  std::string to;
  std::uint64_t seed = 0;
  std::optional<long long> scratch_t;
  std::optional<long long> transfer_t;
  double ratio = 0.0;  // transfer_t / scratch_t when both exist
  std::string skip_reason;
};

std::vector<TransferCell> run_transfer(const ExperimentConfig& cfg);
std::vector<TransferCell> run_retrieval_transfer(const ExperimentConfig& cfg);

struct FeatureLearningRow {
  FeatureNetConfig net;
  std::uint64_t seed = 0;
  std::optional<long long> single_escape;
  std::optional<long long> multi_escape;
  double ratio = 0.0;  // multi / single when both exist
};

std::vector<FeatureLearningRow> run_feature_learning(const ExperimentConfig& cfg);

// Renders one series per task of the chosen metric from a metrics.jsonl file,
// with a vertical marker at each task's plateau escape time.
// metric in {"train_loss", "eval", "nc_dist"}.
void emit_plot(const std::string& jsonl_path, const std::string& metric,
               const std::string& svg_path);

void write_sweep_csv(const SweepResult& result, const std::string& rows_path,
                     const std::string& aggregate_path);
void write_transfer_csv(const std::vector<TransferCell>& cells,
                        const std::string& path);
void write_feature_learning_csv(const std::vector<FeatureLearningRow>& rows,
                                const std::string& path);

}  // namespace plab
