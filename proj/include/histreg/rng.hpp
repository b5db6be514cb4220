#pragma once

#include <cmath>
#include <cstdint>

namespace histreg {

// SplitMix64 (Steele, Lea, Flood 2014). Small, splittable, and identical on
// every platform, which keeps simulation runs bit-reproducible regardless of
// the standard library. Replications are given independent streams by
// seeding with base_seed + replication index.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline double sample_uniform(SplitMix64& rng, double a, double b) {
  return a + (b - a) * rng.next_double();
}

// Box-Muller, cosine branch only; two uniforms per variate.
inline double sample_normal(SplitMix64& rng) {
  double u1 = 1.0 - rng.next_double();  // (0, 1]
  double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

inline double sample_normal(SplitMix64& rng, double mean, double variance) {
  return mean + std::sqrt(variance) * sample_normal(rng);
}

inline double sample_lognormal(SplitMix64& rng, double mu, double variance) {
  return std::exp(sample_normal(rng, mu, variance));
}

inline double sample_chisq1(SplitMix64& rng) {
  double z = sample_normal(rng);
  return z * z;
}

}  // namespace histreg
