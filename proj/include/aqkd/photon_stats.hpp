#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aqkd/rng.hpp"

namespace aqkd {

enum class PhotonLaw {
  kPoisson,        ///< weak laser pulse, mean mu
  kBoseEinstein,   ///< single-mode thermal light (ASE), mean N
  kLaguerreGauss,  ///< amplified coherent pulse: signal S on thermal noise N
};

/// Per-mode photon-number law of the three light states that appear in an
/// optically amplified BB84 link. LaguerreGauss(S, N) is the displaced
/// thermal law
///
///   p(n) = N^n / (1+N)^(n+1) * exp(-S/(1+N)) * L_n(-S / (N(1+N)))
///
/// with L_n the Laguerre polynomial; it reduces to Poisson(S) at N = 0 and
/// to BoseEinstein(N) at S = 0, and the family is closed under binomial
/// (loss) thinning. Means are photons/pulse per mode.
class PhotonDistribution {
 public:
  static PhotonDistribution poisson(double mean) {
    require(mean >= 0.0, "Poisson mean must be >= 0");
    return {PhotonLaw::kPoisson, mean, 0.0};
  }
  static PhotonDistribution bose_einstein(double mean) {
    require(mean >= 0.0, "Bose-Einstein mean must be >= 0");
    return {PhotonLaw::kBoseEinstein, 0.0, mean};
  }
  static PhotonDistribution laguerre_gauss(double signal, double noise) {
    require(signal >= 0.0 && noise >= 0.0,
            "Laguerre-Gauss parameters must be >= 0");
    return {PhotonLaw::kLaguerreGauss, signal, noise};
  }
  static PhotonDistribution vacuum() { return poisson(0.0); }

  PhotonLaw law() const { return law_; }
  /// Coherent-signal part of the mean (Poisson mean lives here).
  double signal_mean() const { return signal_; }
  /// Thermal part of the mean.
  double noise_mean() const { return noise_; }

  double mean() const { return signal_ + noise_; }

  double variance() const {
    switch (law_) {
      case PhotonLaw::kPoisson:
        return signal_;
      case PhotonLaw::kBoseEinstein:
        return noise_ * (1.0 + noise_);
      case PhotonLaw::kLaguerreGauss:
      default:
        return signal_ * (1.0 + 2.0 * noise_) + noise_ * (1.0 + noise_);
    }
  }

  double pmf(std::uint64_t n) const {
    switch (law_) {
      case PhotonLaw::kPoisson:
        return poisson_pmf(signal_, n);
      case PhotonLaw::kBoseEinstein:
        return bose_einstein_pmf(noise_, n);
      case PhotonLaw::kLaguerreGauss:
      default:
        if (noise_ <= 0.0) return poisson_pmf(signal_, n);
        if (signal_ <= 0.0) return bose_einstein_pmf(noise_, n);
        return laguerre_table(n).back();
    }
  }

  /// pmf for n = 0..nmax in one pass (the Laguerre recurrence is O(n)).
  std::vector<double> pmf_table(std::uint64_t nmax) const {
    if (law_ == PhotonLaw::kLaguerreGauss && noise_ > 0.0 && signal_ > 0.0) {
      return laguerre_table(nmax);
    }
    std::vector<double> out;
    out.reserve(nmax + 1);
    for (std::uint64_t n = 0; n <= nmax; ++n) out.push_back(pmf(n));
    return out;
  }

  double vacuum_probability() const {
    switch (law_) {
      case PhotonLaw::kPoisson:
        return std::exp(-signal_);
      case PhotonLaw::kBoseEinstein:
        return 1.0 / (1.0 + noise_);
      case PhotonLaw::kLaguerreGauss:
      default:
        return std::exp(-signal_ / (1.0 + noise_)) / (1.0 + noise_);
    }
  }

  /// Probability generating function E[z^n], z in [0, 1].
  double pgf(double z) const {
    const double w = 1.0 - z;
    switch (law_) {
      case PhotonLaw::kPoisson:
        return std::exp(-signal_ * w);
      case PhotonLaw::kBoseEinstein:
        return 1.0 / (1.0 + noise_ * w);
      case PhotonLaw::kLaguerreGauss:
      default: {
        const double d = 1.0 + noise_ * w;
        return std::exp(-signal_ * w / d) / d;
      }
    }
  }

  /// Binomial (loss) thinning by transmittance eta: every photon survives
  /// independently with probability eta. All three laws are closed under
  /// thinning with means scaled by eta.
  PhotonDistribution thinned(double eta) const {
    require(eta >= 0.0 && eta <= 1.0, "transmittance must be in [0, 1]");
    return {law_, signal_ * eta, noise_ * eta};
  }

  std::uint64_t sample(RandomStream& rs) const {
    switch (law_) {
      case PhotonLaw::kPoisson:
        return sample_poisson(signal_, rs);
      case PhotonLaw::kBoseEinstein:
        return sample_bose_einstein(noise_, rs);
      case PhotonLaw::kLaguerreGauss:
      default: {
        if (noise_ <= 0.0) return sample_poisson(signal_, rs);
        // P representation: coherent amplitude sqrt(S) plus circular complex
        // Gaussian of mean square N, counted as Poisson(|amplitude|^2).
        const double sigma = std::sqrt(noise_ / 2.0);
        const GaussianPair g = sample_gaussian_pair(rs);
        const double re = std::sqrt(signal_) + sigma * g.a;
        const double im = sigma * g.b;
        return sample_poisson(re * re + im * im, rs);
      }
    }
  }

  /// Truncation index for tail sums: beyond mean + 20 sqrt(variance) the
  /// remaining mass is below 1e-9 for every parameter set we use.
  std::uint64_t tail_cutoff() const {
    return static_cast<std::uint64_t>(
               std::ceil(mean() + 20.0 * std::sqrt(variance()))) +
           10;
  }

  friend bool operator==(const PhotonDistribution& a,
                         const PhotonDistribution& b) = default;

 private:
  PhotonDistribution(PhotonLaw law, double signal, double noise)
      : law_(law), signal_(signal), noise_(noise) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  }

  static double poisson_pmf(double mean, std::uint64_t n) {
    if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
    const double nd = static_cast<double>(n);
    return std::exp(nd * std::log(mean) - mean - std::lgamma(nd + 1.0));
  }

  static double bose_einstein_pmf(double mean, std::uint64_t n) {
    if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
    const double q = mean / (1.0 + mean);
    return std::exp(static_cast<double>(n) * std::log(q)) / (1.0 + mean);
  }

  /// p(0..nmax) by the stable three-term recurrence
  ///   p(n+1) = q [ (2n+1+x) p(n) - n q p(n-1) ] / (n+1),
  /// q = N/(1+N), x = S/(N(1+N)); all L_n(-x) terms are positive so the
  /// subtraction loses at most one bit per step.
  std::vector<double> laguerre_table(std::uint64_t nmax) const {
    const double q = noise_ / (1.0 + noise_);
    const double x = signal_ / (noise_ * (1.0 + noise_));
    std::vector<double> p;
    p.reserve(nmax + 1);
    p.push_back(vacuum_probability());
    if (nmax >= 1) p.push_back(q * (1.0 + x) * p[0]);
    for (std::uint64_t n = 1; n < nmax; ++n) {
      const double nd = static_cast<double>(n);
      p.push_back(q * ((2.0 * nd + 1.0 + x) * p[n] - nd * q * p[n - 1]) /
                  (nd + 1.0));
    }
    return p;
  }

  PhotonLaw law_;
  double signal_;
  double noise_;
};

/// Squared signal/orthogonal-mode amplitudes of one amplified pulse in the
/// P representation. The Poisson source is a fixed coherent amplitude
/// sqrt(gain*mu); the amplifier adds circular complex Gaussian noise of mean
/// square n_sp = chi(gain-1) to each polarization mode. Counting either mode
/// at these intensities reproduces LaguerreGauss(gain*mu, n_sp) and
/// BoseEinstein(n_sp) exactly, and Poisson splitting of the intensities
/// gives the correct joint law of any loss partition of the pulse.
struct PulseIntensities {
  double signal;
  double orth;
};

inline PulseIntensities sample_pulse_intensities(double mu, double gain,
                                                 double excess_noise,
                                                 RandomStream& rs) {
  if (mu < 0.0 || gain < 1.0 || excess_noise < 1.0) {
    throw std::invalid_argument(
        "amplified pulse requires mu >= 0, gain >= 1, excess noise >= 1");
  }
  const double n_sp = excess_noise * (gain - 1.0);
  if (n_sp <= 0.0) return {gain * mu, 0.0};
  const double sigma = std::sqrt(n_sp / 2.0);
  const GaussianPair gs = sample_gaussian_pair(rs);
  const GaussianPair go = sample_gaussian_pair(rs);
  const double re = std::sqrt(gain * mu) + sigma * gs.a;
  const double im = sigma * gs.b;
  const double ore = sigma * go.a;
  const double oim = sigma * go.b;
  return {re * re + im * im, ore * ore + oim * oim};
}

/// Joint photon counts (signal mode, orthogonal mode) of one pulse leaving
/// the amplifier. Marginals: LaguerreGauss(gain*mu, n_sp), BoseEinstein(n_sp);
/// with gain = 1 the orthogonal mode is exactly vacuum.
inline std::pair<std::uint64_t, std::uint64_t> sample_amplified_pair(
    double mu, double gain, double excess_noise, RandomStream& rs) {
  const PulseIntensities in = sample_pulse_intensities(mu, gain, excess_noise, rs);
  const std::uint64_t n_signal = sample_poisson(in.signal, rs);
  const std::uint64_t n_orth = in.orth > 0.0 ? sample_poisson(in.orth, rs) : 0;
  return {n_signal, n_orth};
}

}  // namespace aqkd
