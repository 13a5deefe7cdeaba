#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace plab {

// Counter-based generator. Output i is a pure function of (key, i), so
// identical (seed, stream) pairs reproduce the same draw sequence on any
// platform, and substreams can be derived without touching the parent state.
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream) {
    key_ = mix(mix(seed + 0x9E3779B97F4A7C15ull) ^ mix(stream + 0xD1B54A32D192ED03ull));
    ctr_ = 0;
  }

  std::uint64_t next_u64() {
    std::uint64_t x = key_ + ctr_ * 0x9E3779B97F4A7C15ull;
    ++ctr_;
    return mix(x);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. No cached second value, so the state is
  // exactly (key, counter).
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Rademacher ±1.
  int sign() { return (next_u64() & 1) ? 1 : -1; }

  // Independent substream; deterministic in (parent key, id), independent of
  // how far the parent has advanced.
  Rng substream(std::uint64_t id) const {
    Rng r;
    r.key_ = mix(key_ ^ mix(id + 0x8CB92BA72F3D8DD7ull));
    r.ctr_ = 0;
    return r;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return ctr_; }
  void restore(std::uint64_t key, std::uint64_t counter) {
    key_ = key;
    ctr_ = counter;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace plab
