#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace infomean {

namespace detail {

// SplitMix64 finalizer, used to spread (seed, stream) pairs over the full
// 64-bit state space before seeding the engine.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Combines two 64-bit values into one well-mixed engine seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return detail::splitmix64(detail::splitmix64(seed) ^ (stream * 0xD6E8FEB86659FD93ULL));
}

/// Derives a disjoint sub-stream index, e.g. one per Monte Carlo batch or
/// verification trial. The mapping (stream, index) -> sub-stream is fixed.
inline std::uint64_t derive_stream(std::uint64_t stream, std::uint64_t index) {
  return detail::splitmix64(stream ^ (index + 1) * 0xA0761D6478BD642FULL);
}

/// Deterministic random source. mt19937_64 output is fully specified by the
/// standard, and the uniform/normal transforms below avoid the
/// implementation-defined std distributions, so draws are reproducible
/// bit-for-bit for a given (seed, stream).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// log-uniform on [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 2.0 * std::numbers::pi * uniform();
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [lo, hi] by rejection-free scaling (spans are tiny here).
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int v = lo + static_cast<int>(uniform() * span);
    return v > hi ? hi : v;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace infomean
