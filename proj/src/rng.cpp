#include "gcomb/rng.hpp"

#include <cmath>
#include <numbers>

namespace gcomb {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

std::uint64_t Rng::mix(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(mix(seed_ ^ mix(stream + kGolden)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::below(std::size_t n) {
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return static_cast<std::size_t>(r % bound);
  }
}

long Rng::range(long lo, long hi) {
  return lo + static_cast<long>(below(static_cast<std::size_t>(hi - lo + 1)));
}

double Rng::normal() {
  // Box-Muller; one value per call keeps the stream position simple to reason about.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gcomb
