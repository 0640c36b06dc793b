#pragma once

// Shared test utilities: statistical helpers and independent oracle
// implementations. The oracles deliberately avoid the library's samplers and
// bit containers so they stay meaningful as cross-checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

// --------------------------------------------------------------------------
// Regularized incomplete gamma Q(a, x) for chi-square p-values.

inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a, x); Q = 1 - P
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

/// Chi-square p-value of an observed histogram against expected
/// probabilities; bins with expected count below `min_expected` are pooled
/// into the tail.
inline double chi_square_p_value(const std::vector<std::uint64_t>& observed,
                                 const std::vector<double>& probabilities,
                                 std::uint64_t draws,
                                 double min_expected = 5.0) {
  if (observed.size() != probabilities.size())
    throw std::invalid_argument("histogram size mismatch");
  double stat = 0.0;
  int bins = 0;
  double pool_obs = 0.0;
  double pool_exp = 0.0;
  double tail_prob = 1.0;
  for (std::size_t i = 0; i < observed.size(); ++i) tail_prob -= probabilities[i];
  // everything beyond the histogram is pooled as one tail bin
  pool_exp = std::max(0.0, tail_prob) * static_cast<double>(draws);
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) seen += observed[i];
  pool_obs = static_cast<double>(draws - seen);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probabilities[i] * static_cast<double>(draws);
    if (e < min_expected) {
      pool_obs += static_cast<double>(observed[i]);
      pool_exp += e;
      continue;
    }
    const double diff = static_cast<double>(observed[i]) - e;
    stat += diff * diff / e;
    ++bins;
  }
  if (pool_exp >= min_expected) {
    const double diff = pool_obs - pool_exp;
    stat += diff * diff / pool_exp;
    ++bins;
  }
  if (bins < 2) throw std::invalid_argument("too few usable bins");
  return gamma_q(0.5 * (bins - 1), 0.5 * stat);
}

// --------------------------------------------------------------------------
// P-representation Monte Carlo oracle for amplified-pulse photon counting,
// built on the standard library's samplers.

class PRepOracle {
 public:
  explicit PRepOracle(std::uint64_t seed) : rng_(seed) {}

  /// One photon count of an amplified coherent pulse: coherent amplitude
  /// sqrt(signal) plus circular complex Gaussian noise of mean square
  /// `noise`, counted as Poisson(|amplitude|^2).
  std::uint64_t draw(double signal, double noise) {
    std::normal_distribution<double> g(0.0, std::sqrt(noise / 2.0));
    const double re = std::sqrt(signal) + (noise > 0.0 ? g(rng_) : 0.0);
    const double im = noise > 0.0 ? g(rng_) : 0.0;
    std::poisson_distribution<std::uint64_t> p(re * re + im * im);
    return p(rng_);
  }

  /// Binomial thinning of a drawn count (per-photon survival eta).
  std::uint64_t thin(std::uint64_t n, double eta) {
    if (n == 0) return 0;
    std::binomial_distribution<std::uint64_t> b(n, eta);
    return b(rng_);
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// --------------------------------------------------------------------------
// Straight-from-the-text reference of one distillation round, on plain int
// vectors. `coin` supplies the uniform values for re-randomized ambiguous
// bits so a caller can compare against the library bit for bit.

struct RefRound {
  std::vector<int> alice;
  std::vector<int> bob;
  std::vector<int> eve;
  std::vector<int> eve_ambiguous;
  std::vector<std::uint64_t> rejected;
};

inline RefRound reference_distillation_round(const std::vector<int>& a,
                                             const std::vector<int>& b,
                                             const std::vector<int>& e,
                                             const std::vector<int>& e_amb,
                                             const std::function<int()>& coin) {
  if (a.size() != b.size() || a.size() != e.size() || a.size() != e_amb.size() ||
      a.size() % 2 != 0)
    throw std::invalid_argument("reference round needs equal even lengths");
  const std::size_t half = a.size() / 2;
  RefRound out;
  for (std::size_t i = 0; i < half; ++i) {
    const int pa = a[2 * i + 1] ^ a[2 * i];
    const int pb = b[2 * i + 1] ^ b[2 * i];
    if (pa != pb) {
      out.rejected.push_back(i);
      continue;
    }
    out.alice.push_back(a[2 * i]);
    out.bob.push_back(b[2 * i]);
    if (e_amb[2 * i] == 0 && e_amb[2 * i + 1] == 0) {
      out.eve.push_back(e[2 * i]);
      out.eve_ambiguous.push_back(0);
    } else {
      out.eve.push_back(coin());
      out.eve_ambiguous.push_back(1);
    }
  }
  return out;
}

// --------------------------------------------------------------------------

/// Standard error of a proportion.
inline double proportion_sigma(double p, double n) {
  return std::sqrt(std::max(p * (1.0 - p), 1e-300) / n);
}

}  // namespace oracle
