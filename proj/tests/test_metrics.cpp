#include <optional>
#include <vector>

#include "doctest.h"
#include "plab/metrics.hpp"
#include "plab/rng.hpp"

using namespace plab;

namespace {

LossStream step_stream(long long budget, long long drop, double before,
                       double after) {
  LossStream s;
  for (long long t = 1; t <= budget; ++t)
    s.push(t, t <= drop ? before : after);
  return s;
}

// Direct evaluation of the windowed-mean definitions, written independently
// of the production detectors.
std::optional<long long> brute_force_detect(const LossStream& s, double thr,
                                            bool below, long long budget) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 <= kDetectorWindow) continue;  // admissible only for t > 100 entries
    if (s.steps[i] > budget) break;
    double sum = 0;
    for (int j = 0; j < kDetectorWindow; ++j)
      sum += s.values[i - j];
    double mean = sum / kDetectorWindow;
    if (below ? mean < thr : mean > thr) return s.steps[i];
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("stream steps must be strictly increasing") {
  LossStream s;
  s.push(1, 0.5);
  s.push(2, 0.5);
  CHECK_THROWS_AS(s.push(2, 0.5), std::invalid_argument);
}

TEST_CASE("windowed_mean basics") {
  LossStream s;
  for (int t = 1; t <= 200; ++t) s.push(t, t % 2 == 0 ? 2.0 : 0.0);
  CHECK(windowed_mean(s, 200) == doctest::Approx(1.0));
  LossStream c;
  for (int t = 1; t <= 150; ++t) c.push(t, 0.7);
  CHECK(windowed_mean(c, 150) == doctest::Approx(0.7));
  CHECK_THROWS_AS(windowed_mean(c, 50), std::invalid_argument);
}

TEST_CASE("plateau detector reference values") {
  CHECK(plateau_escape_time(step_stream(1000, 200, 1.0, 0.0), 1000) == 221);
  CHECK(!plateau_escape_time(step_stream(1000, 1000, 1.0, 1.0), 1000));
  CHECK(plateau_escape_time(step_stream(400, 0, 1.0, 0.0), 400) == 101);
}

TEST_CASE("exit detector reference values") {
  CHECK(exit_time(step_stream(1000, 300, 1.0, 0.0), Modality::Continuous, 1000) ==
        381);
  LossStream acc;
  for (int t = 1; t <= 300; ++t) acc.push(t, 0.99);
  CHECK(exit_time(acc, Modality::Boolean, 300) == 101);
  LossStream at;
  for (int t = 1; t <= 300; ++t) at.push(t, 0.95);
  CHECK(!exit_time(at, Modality::Boolean, 300));  // strict inequality
}

TEST_CASE("thresholds are strict for the plateau detector too") {
  LossStream s;
  for (int t = 1; t <= 300; ++t) s.push(t, 0.8);
  CHECK(!plateau_escape_time(s, 300));
}

TEST_CASE("detectors equal brute force on random step streams") {
  Rng rng(99, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    long long budget = 120 + static_cast<long long>(rng.below(400));
    long long drop = static_cast<long long>(rng.below(budget + 1));
    double hi = 0.5 + rng.uniform();   // in [0.5, 1.5)
    double lo = rng.uniform() * 0.5;   // in [0, 0.5)
    LossStream s = step_stream(budget, drop, hi, lo);
    CHECK(plateau_escape_time(s, budget) ==
          brute_force_detect(s, 0.8, true, budget));
    CHECK(exit_time(s, Modality::Continuous, budget) ==
          brute_force_detect(s, 0.2, true, budget));
    // Accuracy streams rise instead of falling.
    LossStream a = step_stream(budget, drop, lo, hi);
    CHECK(exit_time(a, Modality::Boolean, budget) ==
          brute_force_detect(a, 0.95, false, budget));
  }
}

TEST_CASE("online detector matches the offline one on random streams") {
  Rng rng(123, 0);
  for (int trial = 0; trial < 200; ++trial) {
    long long budget = 120 + static_cast<long long>(rng.below(300));
    long long drop = static_cast<long long>(rng.below(budget + 1));
    LossStream s = step_stream(budget, drop, 1.0 + rng.uniform() * 0.2,
                               rng.uniform() * 0.7);
    OnlineDetector det(0.8, true);
    for (std::size_t i = 0; i < s.size(); ++i) det.push(s.steps[i], s.values[i]);
    CHECK(det.fired() == plateau_escape_time(s, budget));
  }
}

TEST_CASE("prefix extension never changes an already-detected time") {
  LossStream s = step_stream(400, 200, 1.0, 0.0);
  auto t1 = plateau_escape_time(s, 400);
  for (int t = 401; t <= 800; ++t) s.push(t, 0.0);
  CHECK(plateau_escape_time(s, 800) == t1);
}

TEST_CASE("escape report formatting follows the x.xk (y.yk) convention") {
  EscapeReport r;
  r.t_plateau = 221;
  r.t_exit = 381;
  r.budget = 1000;
  CHECK(r.format() == "0.2k (0.4k)");
  EscapeReport none;
  none.budget = 20000;
  CHECK(none.format() == ">20.0k");
  EscapeReport half;
  half.t_plateau = 1900;
  half.budget = 20000;
  CHECK(half.format() == "1.9k (>20.0k)");
}

TEST_CASE("escape_report combines both detectors") {
  LossStream train = step_stream(1000, 200, 1.0, 0.0);
  LossStream eval = step_stream(1000, 300, 1.0, 0.0);
  EscapeReport r = escape_report(train, eval, Modality::Continuous, 1000);
  CHECK(r.t_plateau == 221);
  CHECK(r.t_exit == 381);
  CHECK(r.escaped());
}
