#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace stlgail {

/// One splitmix64 step; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Independent sub-seed for a (master, path...) pair, e.g. (seed, iteration,
/// phase). Stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// mt19937_64 with distribution code of our own, so draws are identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Standard Cauchy.
  double cauchy();
  bool bernoulli(double p) { return uniform() < p; }

  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace stlgail
