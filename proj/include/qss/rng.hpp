#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qss {

// Mixes a base seed with a stream tag (splitmix64 finalizer) so that
// sub-streams derived from one scenario seed are statistically independent.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Seeded random stream. mt19937_64 is fully specified by the standard; the
// variate transforms are coded here explicitly because the std::
// distributions are implementation-defined and would break byte-identical
// reruns across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream substream(std::uint64_t seed, std::uint64_t tag) {
    return RngStream(mix_seed(seed, tag));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Fair coin mapped to {+1, -1}.
  int sign() { return (gen_() & 1ull) ? +1 : -1; }

  // p <= 0 and p >= 1 are decided without consuming a draw.
  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  // Standard normal, Box-Muller without spare caching so that the number of
  // raw draws per call is fixed.
  double gaussian() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t binomial(std::uint64_t n, double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (uniform01() < p) ++k;
    }
    return k;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qss
