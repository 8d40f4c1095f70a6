#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace contrack {

// Deterministic 64-bit generator (splitmix64). The standard <random>
// distributions are implementation-defined, so every draw needed for
// reproducible output goes through this class: identical seed and call
// order give identical results on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

  // Derives an independent stream, e.g. one per video or per sequence.
  Rng(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(mix(seed) + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return finalize(state_);
  }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), unbiased via rejection; n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = ~0ull - ~0ull % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Standard normal, Box-Muller. Consumes exactly two draws per call.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Knuth's method; fine for the small rates used here.
  int poisson(double mean) {
    const double threshold = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > threshold);
    return k - 1;
  }

  // First k entries of a Fisher-Yates permutation of 0..n-1.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) {
      const int j = i + static_cast<int>(uniform_below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t z) { return finalize(z + 0x9E3779B97F4A7C15ull); }

  std::uint64_t state_;
};

}  // namespace contrack
