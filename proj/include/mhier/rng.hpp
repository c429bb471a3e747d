#pragma once

#include <cmath>
#include <cstdint>

namespace mhier {

// Splittable counter-based generator. Each trajectory gets its own stream
// derived from (master seed, stream index), so statistics merge the same way
// regardless of execution order. SplitMix64 is equivalent to hashing a
// counter, which keeps the streams independent and the output portable
// (no reliance on std::distributions, whose results vary across libraries).
class Rng {
 public:
  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    Rng r;
    r.state_ = mix(master_seed ^ mix(stream_index + 0x9e3779b97f4a7c15ull));
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0,1). 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1. Rejection-free Lemire reduction is not
  // needed here; the tiny modulo bias at n << 2^64 is irrelevant for tests,
  // but we keep it unbiased anyway via rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive range
    return lo + static_cast<std::int64_t>(uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double exponential(double rate) {
    double u;
    do { u = uniform01(); } while (u == 0.0);
    return -std::log(u) / rate;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

}  // namespace mhier
