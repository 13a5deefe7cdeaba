#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plab/task.hpp"

namespace plab {

// Ordered (step, value) samples of one task's normalized train loss or eval
// metric. Steps are strictly increasing.
struct LossStream {
  std::vector<std::int64_t> steps;
  std::vector<double> values;

  void push(std::int64_t step, double value);
  size_t size() const { return steps.size(); }
};

constexpr int kDetectorWindow = 100;

// Mean of the window of 100 entries ending at index `last` (inclusive).
double windowed_mean_at(const LossStream& stream, size_t last,
                        int window = kDetectorWindow);
// Mean of the last `window` values ending at step t. Throws if the stream has
// no entry at t or fewer than `window` entries up to it.
double windowed_mean(const LossStream& stream, std::int64_t t,
                     int window = kDetectorWindow);

// Smallest step t > 100 entries with trailing windowed mean < 0.8, or absent.
std::optional<std::int64_t> plateau_escape_time(const LossStream& stream,
                                                std::int64_t budget);

// Continuous: windowed mean test error < 0.2; boolean: windowed mean test
// accuracy > 0.95. Strict inequalities.
std::optional<std::int64_t> exit_time(const LossStream& stream, Modality modality,
                                      std::int64_t budget);

struct EscapeReport {
  std::optional<std::int64_t> t_plateau;
  std::optional<std::int64_t> t_exit;
  std::int64_t budget = 0;
  bool escaped() const { return t_plateau.has_value(); }

  // Table-style rendering: "0.2k (0.4k)", ">20k" when never escaped.
  std::string format() const;
};

EscapeReport escape_report(const LossStream& train_stream,
                           const LossStream& eval_stream, Modality modality,
                           std::int64_t budget);

// Streaming fold over one metric stream; fires the first time the trailing
// window crosses the threshold. Equivalent to the offline detectors above.
class OnlineDetector {
 public:
  // `below`: fire when windowed mean < threshold; else when > threshold.
  OnlineDetector(double threshold, bool below, int window = kDetectorWindow);
  void push(std::int64_t step, double value);
  std::optional<std::int64_t> fired() const { return fired_; }
  // Entries seen so far; the detector needs a full window plus the t > 100
  // admissibility constraint before it can fire.
  std::int64_t count() const { return count_; }

 private:
  double threshold_;
  bool below_;
  int window_;
  std::vector<double> ring_;
  std::int64_t count_ = 0;
  std::optional<std::int64_t> fired_;
};

}  // namespace plab
