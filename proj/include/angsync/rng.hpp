#pragma once

// Seedable, portable random streams.
//
// Every generator draws from named substreams derived from one 64-bit seed:
//
//   stream_seed = splitmix64(seed ^ splitmix64(stream_tag))
//
// and each substream is an independent std::mt19937_64. Because the engine
// is fully specified by the standard and the conversions to doubles below
// are written out by hand (std::*_distribution is implementation-defined),
// the same seed gives bit-identical samples on any conforming platform.
// Adding a new purpose means adding a new Stream tag; existing streams are
// unaffected.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace angsync {

enum class Stream : std::uint64_t {
  Angles = 1,    // planted angles / clock times
  Graph = 2,     // edge existence, good/bad labels, sphere points
  Rewiring = 3,  // small-world rewiring decisions and new endpoints
  Offsets = 4,   // uniformly random outlier offsets
  Noise = 5,     // Gaussian measurement noise (clock model)
  Solver = 6,    // solver start vectors
  Sampling = 7,  // diagnostic sampling (triangle consistency)
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic child seed for (master, a, b), e.g. (sweep seed, p index, trial).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ (a + 0x632BE59BD9B4E019ULL)) ^ (b + 0x8CB92BA72F3D8DD7ULL));
}

class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream)
      : engine_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in [0, 2*pi); the product can round up to 2*pi, which maps to 0.
  double uniform_angle() {
    const double a = 2.0 * std::numbers::pi * uniform();
    return a < 2.0 * std::numbers::pi ? a : 0.0;
  }

  /// True with probability p (p = 1 always true, p = 0 never).
  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace angsync
