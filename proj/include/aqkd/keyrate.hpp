#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace aqkd {

inline double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("probability must be in [0, 1]");
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// Eve's information per distilled bit under passive tapping: her ambiguous
/// bits carry nothing, her unambiguous bits see Alice's key through a binary
/// symmetric channel with error rate e_e.
inline double eve_information(double ambiguous_fraction,
                              double unambiguous_ber) {
  if (ambiguous_fraction < 0.0 || ambiguous_fraction > 1.0 ||
      unambiguous_ber < 0.0 || unambiguous_ber > 1.0)
    throw std::invalid_argument("probabilities must be in [0, 1]");
  return (1.0 - ambiguous_fraction) * (1.0 - binary_entropy(unambiguous_ber));
}

/// One-way secret fraction after error correction at inefficiency f_ec and
/// privacy amplification against the tap, clamped at zero.
inline double secret_fraction(double bob_ber, double ambiguous_fraction,
                              double unambiguous_ber, double f_ec) {
  if (bob_ber < 0.0 || bob_ber > 1.0)
    throw std::invalid_argument("BER must be in [0, 1]");
  if (f_ec < 1.0) throw std::invalid_argument("EC inefficiency must be >= 1");
  return std::max(0.0, 1.0 - f_ec * binary_entropy(bob_ber) -
                           eve_information(ambiguous_fraction, unambiguous_ber));
}

/// Secret bits per transmitted pulse from measured distillation statistics.
inline double secret_yield(std::uint64_t distilled_bits, std::uint64_t pulses,
                           double distilled_ber, double ambiguous_fraction,
                           double unambiguous_ber, double f_ec) {
  if (pulses == 0) throw std::invalid_argument("pulse count must be positive");
  if (distilled_bits == 0) return 0.0;
  return static_cast<double>(distilled_bits) / static_cast<double>(pulses) *
         secret_fraction(distilled_ber, ambiguous_fraction, unambiguous_ber,
                         f_ec);
}

/// Upper bound on the secret-key capacity of a lossy channel of
/// transmittance eta: log2((1 + eta) / (1 - eta)).
inline double takeoka_bound(double eta) {
  if (eta < 0.0 || eta >= 1.0)
    throw std::invalid_argument("transmittance must be in [0, 1)");
  return std::log2((1.0 + eta) / (1.0 - eta));
}

/// Which transmittance feeds the capacity-bound curve.
enum class TakeokaConvention {
  kChannelTimesDetector,  ///< eta = eta_fiber * eta_detector (default)
  kChannelOnly,           ///< eta = eta_fiber
};

/// One sweep point: everything measured for a (curve, span) pair.
struct YieldPoint {
  double length_km = 0.0;
  double gain = 1.0;
  double mu = 0.0;
  unsigned rounds = 0;
  double sift_yield = 0.0;      ///< sifted bits per pulse
  double sifted_ber = 0.0;
  double distilled_yield = 0.0; ///< distilled bits per pulse
  double distilled_ber = 0.0;
  double eve_ambiguous = 0.0;   ///< Delta on the distilled key
  double eve_ber = 0.0;         ///< Eve's unambiguous BER on the distilled key
  double secret_fraction = 0.0;
  double secret_yield = 0.0;    ///< secret bits per transmitted pulse
  double takeoka = 0.0;         ///< capacity bound at this span
};

}  // namespace aqkd
