#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sawlab {

/// Seeded random stream with stateless draw functions.
///
/// Wraps mt19937_64 but avoids std distributions: normal() keeps no cached
/// spare value, so every draw consumes a fixed number of engine words and a
/// stream is reproducible from its seed alone regardless of call interleaving.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  void seed(std::uint64_t s) { engine_.seed(s); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    static_cast<double>(hi - lo + 1) * uniform());
  }

  /// Standard normal via Box-Muller (two engine words per draw, no cache).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Derive an independent child seed; advances this stream by one word.
  std::uint64_t fork() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 step, used to spread correlated integer seeds (env index,
/// trial index) into well-separated engine seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(base ^ mix_seed(stream + 1));
}

}  // namespace sawlab
