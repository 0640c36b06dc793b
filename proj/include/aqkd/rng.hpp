#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>

namespace aqkd {

/// All stochastic code draws from an explicit stream so that runs are
/// reproducible bit-for-bit. The engine output sequence is fixed by the
/// standard, so results depend only on (seed, stream id), never on the
/// platform's distribution implementations (we sample everything ourselves).
using RandomStream = std::mt19937_64;

/// splitmix64 finalizer; full-avalanche 64-bit mix.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Combine a base seed with stream/point indices into a fresh 64-bit seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                           std::uint64_t b = 0,
                                           std::uint64_t c = 0) noexcept {
  return mix64(mix64(mix64(seed ^ mix64(a)) ^ mix64(b)) ^ mix64(c));
}

/// Independent stream for a work shard. Streams with distinct ids never
/// share state, so shards can run on any worker in any order.
inline RandomStream derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RandomStream(derive_seed(seed, stream_id));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform(RandomStream& rs) {
  return static_cast<double>(rs() >> 11) * 0x1.0p-53;
}

inline bool sample_bit(RandomStream& rs) { return (rs() & 1ull) != 0; }

struct GaussianPair {
  double a;
  double b;
};

/// Two independent standard normals (Box-Muller, two uniforms).
inline GaussianPair sample_gaussian_pair(RandomStream& rs) {
  const double u1 = 1.0 - uniform(rs);  // (0, 1]
  const double u2 = uniform(rs);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 6.283185307179586476925286766559 * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

namespace detail {

/// Transformed-rejection Poisson sampler (Hoermann's PTRS), exact for
/// mean >= 10. About 1.1 uniform pairs per draw.
inline std::uint64_t sample_poisson_ptrs(double mean, RandomStream& rs) {
  const double slam = std::sqrt(mean);
  const double llam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform(rs) - 0.5;
    const double v = uniform(rs);
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * llam - mean - std::lgamma(kf + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace detail

/// Exact Poisson sample. Inversion by sequential search below mean 20
/// (roughly mean+1 iterations, one uniform), PTRS above.
inline std::uint64_t sample_poisson(double mean, RandomStream& rs) {
  if (mean <= 0.0) return 0;
  if (mean < 20.0) {
    const double u = uniform(rs);
    double term = std::exp(-mean);
    double cdf = term;
    std::uint64_t k = 0;
    // cap unreachable in practice; guards against u in the 1e-16 tail
    const std::uint64_t cap = static_cast<std::uint64_t>(mean + 60.0 * std::sqrt(mean) + 30.0);
    while (u > cdf && k < cap) {
      ++k;
      term *= mean / static_cast<double>(k);
      cdf += term;
    }
    return k;
  }
  return detail::sample_poisson_ptrs(mean, rs);
}

/// Exact geometric sample with P(n) = mean^n / (1+mean)^(n+1)
/// (single-mode thermal photon count).
inline std::uint64_t sample_bose_einstein(double mean, RandomStream& rs) {
  if (mean <= 0.0) return 0;
  const double q = mean / (1.0 + mean);
  const double u = 1.0 - uniform(rs);  // (0, 1]
  return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(q)));
}

/// Exact Binomial(n, p) by CDF inversion; one uniform, ~np iterations.
inline std::uint64_t sample_binomial(std::uint64_t n, double p, RandomStream& rs) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - sample_binomial(n, 1.0 - p, rs);
  const double u = uniform(rs);
  double term = std::pow(1.0 - p, static_cast<double>(n));
  double cdf = term;
  const double odds = p / (1.0 - p);
  std::uint64_t k = 0;
  while (u > cdf && k < n) {
    term *= static_cast<double>(n - k) * odds / static_cast<double>(k + 1);
    ++k;
    cdf += term;
  }
  return k;
}

/// Binomial(n, 1/2) from raw engine bits.
inline std::uint64_t sample_binomial_half(std::uint64_t n, RandomStream& rs) {
  std::uint64_t k = 0;
  while (n >= 64) {
    k += static_cast<std::uint64_t>(std::popcount(rs()));
    n -= 64;
  }
  if (n > 0) {
    k += static_cast<std::uint64_t>(std::popcount(rs() & (~0ull >> (64 - n))));
  }
  return k;
}

}  // namespace aqkd
