#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "plab/metrics.hpp"

namespace plab {

// One logged observation. eval/nc_dist are NaN except at eval cadence;
// wall_ms is NaN unless timing capture was enabled (it is volatile and
// excluded from deterministic log comparison).
struct MetricsRecord {
  long long step = 0;
  int task = 0;
  double loss_norm = 0.0;
  double eval = std::nan("");
  double nc_dist = std::nan("");
  double wall_ms = std::nan("");
};

struct RunLog {
  std::vector<std::string> task_names;
  std::vector<MetricsRecord> records;
};

// One JSON object per line: {"step":..,"task":"lr","loss_norm":..} with
// "eval"/"nc_dist" present only when set, "wall_ms" only when requested.
void write_jsonl(const RunLog& log, const std::string& path,
                 bool include_timing = false);
RunLog read_jsonl(const std::string& path);
std::string jsonl_line(const RunLog& log, const MetricsRecord& r,
                       bool include_timing);

// Aggregated escape/exit table, one row per (label, task).
struct EscapeRow {
  std::string label;
  std::string task;
  std::uint64_t seed = 0;
  EscapeReport report;
};
void write_escape_csv(const std::vector<EscapeRow>& rows, const std::string& path);

}  // namespace plab
