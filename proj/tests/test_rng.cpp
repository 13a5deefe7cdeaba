#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "plab/rng.hpp"

using plab::Rng;

TEST_CASE("identical (seed, stream) pairs reproduce the same sequence") {
  Rng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct seeds and streams give distinct sequences") {
  Rng a(42, 7), b(43, 7), c(42, 8);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++same_ab;
    if (va == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("restore resumes mid-sequence exactly") {
  Rng a(5, 1);
  for (int i = 0; i < 17; ++i) a.next_u64();
  std::uint64_t key = a.key(), ctr = a.counter();
  std::vector<std::uint64_t> rest;
  for (int i = 0; i < 50; ++i) rest.push_back(a.next_u64());
  Rng b;
  b.restore(key, ctr);
  for (std::uint64_t v : rest) CHECK(b.next_u64() == v);
}

TEST_CASE("substream is independent of parent advancement") {
  Rng a(9, 2), b(9, 2);
  for (int i = 0; i < 123; ++i) b.next_u64();
  Rng sa = a.substream(11), sb = b.substream(11);
  for (int i = 0; i < 100; ++i) CHECK(sa.next_u64() == sb.next_u64());
  // And differs from the parent stream and from other ids.
  Rng other = a.substream(12);
  CHECK(a.substream(11).next_u64() != other.next_u64());
}

TEST_CASE("uniform lies in [0, 1); uniform_pos in (0, 1]") {
  Rng r(1, 0);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double p = r.uniform_pos();
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("below(n) is bounded and roughly uniform") {
  Rng r(3, 3);
  std::vector<int> buckets(10, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    std::uint64_t v = r.below(10);
    REQUIRE(v < 10);
    ++buckets[v];
  }
  for (int b : buckets) CHECK(std::abs(b - draws / 10) < 600);
}

TEST_CASE("normal has approximately unit moments") {
  Rng r(17, 4);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double v = r.normal();
    sum += v;
    sum2 += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("sign is a fair coin") {
  Rng r(23, 5);
  int pos = 0;
  for (int i = 0; i < 100000; ++i)
    if (r.sign() == 1) ++pos;
  CHECK(std::abs(pos - 50000) < 700);
}
