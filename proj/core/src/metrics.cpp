#include "plab/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace plab {

void LossStream::push(std::int64_t step, double value) {
  if (!steps.empty() && step <= steps.back())
    throw std::invalid_argument("LossStream: steps must be strictly increasing");
  steps.push_back(step);
  values.push_back(value);
}

double windowed_mean_at(const LossStream& stream, size_t last, int window) {
  if (last >= stream.size() || last + 1 < static_cast<size_t>(window))
    throw std::invalid_argument("windowed_mean: not enough entries");
  // Compensated summation keeps constant windows exact so strict threshold
  // comparisons are not spoiled by accumulation error.
  double sum = 0, comp = 0;
  for (size_t i = last + 1 - window; i <= last; ++i) {
    double y = stream.values[i] - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / window;
}

double windowed_mean(const LossStream& stream, std::int64_t t, int window) {
  for (size_t i = 0; i < stream.size(); ++i)
    if (stream.steps[i] == t) return windowed_mean_at(stream, i, window);
  throw std::invalid_argument("windowed_mean: no entry at requested step");
}

namespace {

// min over entries with 1-based index > 100 of the trailing 100-entry mean
// crossing the threshold, strict inequality in the given direction.
std::optional<std::int64_t> detect(const LossStream& stream, std::int64_t budget,
                                   double threshold, bool below) {
  for (size_t i = kDetectorWindow; i < stream.size(); ++i) {
    if (stream.steps[i] > budget) break;
    double m = windowed_mean_at(stream, i);
    if (below ? (m < threshold) : (m > threshold)) return stream.steps[i];
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::int64_t> plateau_escape_time(const LossStream& stream,
                                                std::int64_t budget) {
  return detect(stream, budget, 0.8, true);
}

std::optional<std::int64_t> exit_time(const LossStream& stream, Modality modality,
                                      std::int64_t budget) {
  return modality == Modality::Continuous ? detect(stream, budget, 0.2, true)
                                          : detect(stream, budget, 0.95, false);
}

std::string EscapeReport::format() const {
  char buf[64];
  auto fmt = [&](std::int64_t v) {
    std::snprintf(buf, sizeof(buf), "%.1fk", static_cast<double>(v) / 1000.0);
    return std::string(buf);
  };
  std::string over = ">" + fmt(budget);
  if (!t_plateau && !t_exit) return over;
  std::string head = t_plateau ? fmt(*t_plateau) : over;
  std::string tail = t_exit ? fmt(*t_exit) : over;
  return head + " (" + tail + ")";
}

EscapeReport escape_report(const LossStream& train_stream,
                           const LossStream& eval_stream, Modality modality,
                           std::int64_t budget) {
  EscapeReport rep;
  rep.budget = budget;
  rep.t_plateau = plateau_escape_time(train_stream, budget);
  rep.t_exit = exit_time(eval_stream, modality, budget);
  return rep;
}

OnlineDetector::OnlineDetector(double threshold, bool below, int window)
    : threshold_(threshold), below_(below), window_(window), ring_(window, 0.0) {}

void OnlineDetector::push(std::int64_t step, double value) {
  size_t slot = static_cast<size_t>(count_ % window_);
  ring_[slot] = value;
  ++count_;
  if (fired_ || count_ <= window_) return;
  // Recompute with compensated summation; matches windowed_mean_at exactly.
  double sum = 0, comp = 0;
  for (double v : ring_) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double m = sum / window_;
  if (below_ ? (m < threshold_) : (m > threshold_)) fired_ = step;
}

}  // namespace plab
