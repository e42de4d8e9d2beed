#pragma once

#include <cmath>
#include <random>

#include "cforge/types.hpp"

namespace cforge {

// Deterministic RNG used everywhere randomness is needed. Sub-streams are
// derived with `child(id)` so that parallel evaluations stay reproducible
// independent of scheduling.
class Rng {
 public:
  explicit Rng(u64 seed) : seed_(seed), gen_(seed) {}

  double uniform() { return unit_(gen_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(gen_);
  }

  double normal(double mean, double stddev) {
    std::normal_distribution<double> d(mean, stddev);
    return d(gen_);
  }

  // Truncated normal: rejection-sampled into [lo, hi], falling back to a
  // clamp after a bounded number of attempts (relevant only for very large
  // sigma relative to the window).
  double truncated_normal(double mean, double stddev, double lo, double hi) {
    if (stddev <= 0.0) return std::min(hi, std::max(lo, mean));
    for (int i = 0; i < 64; ++i) {
      double x = normal(mean, stddev);
      if (x >= lo && x <= hi) return x;
    }
    return std::min(hi, std::max(lo, normal(mean, stddev)));
  }

  u64 next_u64() { return gen_(); }

  // splitmix64 over (seed, id); decouples sub-streams from draw order.
  static u64 derive(u64 seed, u64 id) {
    u64 z = seed + 0x9e3779b97f4a7c15ULL * (id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  Rng child(u64 id) const { return Rng(derive(seed_, id)); }

  u64 seed() const { return seed_; }
  std::mt19937_64& engine() { return gen_; }

 private:
  u64 seed_;
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace cforge
