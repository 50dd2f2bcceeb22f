#pragma once

#include <cstdint>
#include <vector>

namespace unlock {

// Deterministic 64-bit generator (splitmix64). Every seeded stage of the
// pipeline draws from this exact sequence, so outputs are reproducible across
// platforms and standard library versions; std::mt19937 distributions are
// implementation-defined and deliberately avoided.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n). n == 0 is a caller bug; returns 0.
  // Plain modulo: the bias at 64 bits is far below anything observable here
  // and keeps the sequence trivially portable.
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool coin() { return (next() & 1u) != 0; }

 private:
  std::uint64_t state_;
};

// First k elements of a partial Fisher-Yates shuffle of {0, ..., n-1}.
// Used for drawing pool objects without replacement.
std::vector<std::size_t> sample_without_replacement(SplitMix64& rng, std::size_t n, std::size_t k);

}  // namespace unlock
