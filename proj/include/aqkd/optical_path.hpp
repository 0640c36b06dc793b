#pragma once

#include <cmath>
#include <stdexcept>

#include "aqkd/photon_stats.hpp"

namespace aqkd {

/// Representative SMF attenuation at 1550 nm.
inline constexpr double kStandardSmfAttenuationDbPerKm = 0.2;
/// Ultra-low-loss SMF preset.
inline constexpr double kUltraLowLossSmfAttenuationDbPerKm = 0.17;

/// Phase-insensitive optical amplifier. ASE mean per polarization mode is
/// n_sp = chi (G - 1); chi = 1 is the quantum-limited 3-dB floor.
struct AmplifierSpec {
  double gain = 1.0;
  double excess_noise = 1.0;

  void validate() const {
    if (gain < 1.0) throw std::invalid_argument("amplifier gain must be >= 1");
    if (excess_noise < 1.0)
      throw std::invalid_argument("excess noise factor must be >= 1");
  }
};

inline double ase_mean(const AmplifierSpec& amp) {
  amp.validate();
  return amp.excess_noise * (amp.gain - 1.0);
}

struct FiberSpec {
  double length_km = 0.0;
  double attenuation_db_per_km = kStandardSmfAttenuationDbPerKm;

  void validate() const {
    if (length_km < 0.0) throw std::invalid_argument("fiber length must be >= 0");
    if (attenuation_db_per_km <= 0.0)
      throw std::invalid_argument("fiber attenuation must be > 0");
  }
};

inline double transmittance(const FiberSpec& fiber) {
  fiber.validate();
  return std::pow(10.0, -fiber.attenuation_db_per_km * fiber.length_km / 10.0);
}

/// Matched narrowband filters at both enclaves. The photon-number model
/// assumes exactly one longitudinal mode per polarization carries ASE, so a
/// configuration without single-mode filtering is rejected rather than
/// silently mis-modeled. Out-of-band ASE and Raman noise are taken as
/// suppressed below the rejection floor and are not simulated.
struct FilterSpec {
  bool single_longitudinal_mode = true;
  double out_of_band_rejection_db = 30.0;

  void validate() const {
    if (!single_longitudinal_mode)
      throw std::invalid_argument(
          "multimode ASE is not modeled: single-longitudinal-mode filtering "
          "is required");
    if (out_of_band_rejection_db < 0.0)
      throw std::invalid_argument("out-of-band rejection must be >= 0 dB");
  }
};

/// Per-photon probability that a photon arriving at Bob's receiver is
/// analyzed in the wrong polarization when measured in the preparation basis.
struct PolarizationSpec {
  double misroute_probability = 0.01;

  void validate() const {
    if (misroute_probability < 0.0 || misroute_probability > 0.5)
      throw std::invalid_argument("polarization error must be in [0, 0.5]");
  }
};

/// The two polarization modes of one pulse: Alice's encoded mode plus the
/// orthogonal mode (ASE only).
struct ModePair {
  PhotonDistribution signal = PhotonDistribution::vacuum();
  PhotonDistribution orth = PhotonDistribution::vacuum();

  /// Polarization fidelity F = mean(signal) / total mean.
  double fidelity() const {
    const double total = signal.mean() + orth.mean();
    return total > 0.0 ? signal.mean() / total : 1.0;
  }
};

/// State leaving Alice's enclave: LaguerreGauss(G mu, n_sp) in the encoded
/// mode, BoseEinstein(n_sp) in the orthogonal one. With unity gain this is
/// the bare BB84 source (Poisson signal, vacuum orthogonal mode).
inline ModePair amplified_state(double mu, const AmplifierSpec& amp) {
  if (mu < 0.0) throw std::invalid_argument("mean photon number must be >= 0");
  const double n_sp = ase_mean(amp);
  if (n_sp <= 0.0) {
    return {PhotonDistribution::poisson(mu), PhotonDistribution::vacuum()};
  }
  return {PhotonDistribution::laguerre_gauss(amp.gain * mu, n_sp),
          PhotonDistribution::bose_einstein(n_sp)};
}

/// Propagate both modes through a lossy element of transmittance eta.
inline ModePair propagate(const ModePair& state, double eta) {
  return {state.signal.thinned(eta), state.orth.thinned(eta)};
}

}  // namespace aqkd
