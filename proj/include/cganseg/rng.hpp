#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace cganseg {

/// Seeded pseudorandom source shared by initialization, dropout, shuffling
/// and synthetic data.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms to the vendor:
///   - uniform(): top 53 bits of one draw, scaled to [0, 1)
///   - normal():  Box-Muller on two uniform() draws, second value cached
///   - index(n):  rejection sampling on the 64-bit draw
/// The same seed therefore yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  std::size_t index(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(T& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Derives an independent stream seed from a user seed and a tag (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace cganseg
