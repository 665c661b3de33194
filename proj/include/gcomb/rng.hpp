#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gcomb {

/// Seedable 64-bit generator used everywhere randomness is needed.
///
/// The engine is std::mt19937_64 seeded through the SplitMix64 finalizer. All
/// derived draws (uniform reals, bounded integers, normals) are computed here
/// rather than through <random> distributions, whose output is
/// implementation-defined, so streams are identical across standard libraries.
///
/// Independent streams come from split(): child seed = mix(seed ^ mix(stream + golden)).
/// Instance i of a batch always uses split(i), so batches can be generated in any
/// order or in parallel and still reproduce bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static std::uint64_t mix(std::uint64_t x);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n); n must be positive.
  std::size_t below(std::size_t n);
  // Uniform integer on [lo, hi].
  long range(long lo, long hi);
  bool bernoulli(double p) { return uniform() < p; }
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace gcomb
