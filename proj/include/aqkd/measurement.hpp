#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>

#include "aqkd/optical_path.hpp"
#include "aqkd/photon_stats.hpp"
#include "aqkd/rng.hpp"

namespace aqkd {

/// Gated threshold single-photon detector (InGaAs APD class).
struct DetectorSpec {
  double efficiency = 0.20;
  double dark_count_probability = 1.2e-5;  ///< per gate per detector

  void validate() const {
    if (efficiency <= 0.0 || efficiency > 1.0)
      throw std::invalid_argument("detector efficiency must be in (0, 1]");
    if (dark_count_probability < 0.0 || dark_count_probability >= 1.0)
      throw std::invalid_argument("dark count probability must be in [0, 1)");
  }
};

/// The simulator works in the frame of Alice's preparation: basis 0 is the
/// basis she encoded in, and within it detector 0 is the one her bit value
/// targets. Bob's absolute bit is alice_bit XOR (detector index).
enum class Basis : std::uint8_t { kPreparation = 0, kConjugate = 1 };

/// Click pattern of Bob's four gated detectors for one pulse.
struct BobOutcome {
  std::array<std::array<bool, 2>, 2> clicks{};  ///< [basis][detector]
  std::uint64_t detected_photons = 0;           ///< photons absorbed, either basis

  bool any_click(Basis b) const {
    const auto& row = clicks[static_cast<std::size_t>(b)];
    return row[0] || row[1];
  }
};

/// Detection outcome plus the photons Bob failed to absorb, which the
/// passive-tapping adversary collects with mode identity intact.
struct DetectionResult {
  BobOutcome bob;
  std::uint64_t undetected_signal = 0;
  std::uint64_t undetected_orth = 0;
};

struct ResolvedEvent {
  Basis basis = Basis::kPreparation;
  std::uint8_t bit = 0;  ///< relative: 0 means "reads Alice's bit"
  bool double_click = false;
};

struct EveBit {
  std::uint8_t value = 0;  ///< relative to Alice's bit, as for ResolvedEvent
  bool ambiguous = false;
};

/// How the tap turns undetected photons into sifted-basis photo-counts.
enum class EveTapPolicy {
  /// Physical passive-basis-choice receiver: each photon picks one of the
  /// two analyzers with probability 1/2 before the sifting announcement, so
  /// only about half the tapped photons end up in the announced basis.
  kPassiveSplit,
  /// Idealized stronger adversary that holds every photon until sifting is
  /// announced and measures all of them in the announced basis.
  kStoredMeasurement,
};

namespace detail {

/// Route already-absorbed photons to the four detectors. Signal-mode photons
/// hit the correct preparation-basis detector with probability 1 - p_pol;
/// orthogonal-mode photons the opposite one; in the conjugate basis every
/// photon is 50/50.
inline void route_detected(std::uint64_t detected_signal,
                           std::uint64_t detected_orth, double p_pol,
                           RandomStream& rs,
                           std::array<std::array<std::uint64_t, 2>, 2>& counts) {
  for (std::uint64_t i = 0; i < detected_signal; ++i) {
    if (!sample_bit(rs)) {
      ++counts[0][uniform(rs) < p_pol ? 1 : 0];
    } else {
      ++counts[1][sample_bit(rs) ? 1 : 0];
    }
  }
  for (std::uint64_t i = 0; i < detected_orth; ++i) {
    if (!sample_bit(rs)) {
      ++counts[0][uniform(rs) < p_pol ? 0 : 1];
    } else {
      ++counts[1][sample_bit(rs) ? 1 : 0];
    }
  }
}

/// Threshold clicks from photon counts plus independent dark counts, drawn
/// in fixed detector order (prep 0, prep 1, conj 0, conj 1).
inline BobOutcome clicks_from_counts(
    const std::array<std::array<std::uint64_t, 2>, 2>& counts, double p_dark,
    std::uint64_t detected, RandomStream& rs) {
  BobOutcome out;
  out.detected_photons = detected;
  for (int b = 0; b < 2; ++b) {
    for (int d = 0; d < 2; ++d) {
      const bool dark = uniform(rs) < p_dark;
      out.clicks[b][d] = counts[b][d] > 0 || dark;
    }
  }
  return out;
}

}  // namespace detail

/// Per-photon detection with survival probability p_detect; the remainder
/// goes to the tap. Detected photons choose a basis 50/50 (passive splitter)
/// and route per polarization; each detector clicks on >= 1 photon or a dark
/// count. Draw order per pulse: signal photons, orth photons, dark counts.
inline DetectionResult detect_pulse(std::uint64_t n_signal,
                                    std::uint64_t n_orth, double p_detect,
                                    double p_dark, double p_pol,
                                    RandomStream& rs) {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};
  DetectionResult res;
  std::uint64_t det_sig = 0;
  std::uint64_t det_orth = 0;
  for (std::uint64_t i = 0; i < n_signal; ++i) {
    if (uniform(rs) < p_detect)
      ++det_sig;
    else
      ++res.undetected_signal;
  }
  for (std::uint64_t i = 0; i < n_orth; ++i) {
    if (uniform(rs) < p_detect)
      ++det_orth;
    else
      ++res.undetected_orth;
  }
  detail::route_detected(det_sig, det_orth, p_pol, rs, counts);
  res.bob = detail::clicks_from_counts(counts, p_dark, det_sig + det_orth, rs);
  return res;
}

/// Bob's receiver acting on post-fiber counts (detection efficiency applied
/// per photon before basis routing).
inline DetectionResult bob_detect(std::uint64_t n_signal, std::uint64_t n_orth,
                                  const DetectorSpec& spec, double p_pol,
                                  RandomStream& rs) {
  spec.validate();
  return detect_pulse(n_signal, n_orth, spec.efficiency,
                      spec.dark_count_probability, p_pol, rs);
}

/// Collapse a click pattern to Bob's announced (basis, bit). No clicks:
/// nothing. Clicks in both bases: basis chosen uniformly. Both detectors of
/// the chosen basis: uniform bit, flagged as a double click.
inline std::optional<ResolvedEvent> resolve_event(const BobOutcome& outcome,
                                                  RandomStream& rs) {
  const bool prep = outcome.any_click(Basis::kPreparation);
  const bool conj = outcome.any_click(Basis::kConjugate);
  if (!prep && !conj) return std::nullopt;
  ResolvedEvent ev;
  if (prep && conj) {
    ev.basis = sample_bit(rs) ? Basis::kConjugate : Basis::kPreparation;
  } else {
    ev.basis = prep ? Basis::kPreparation : Basis::kConjugate;
  }
  const auto& row = outcome.clicks[static_cast<std::size_t>(ev.basis)];
  if (row[0] && row[1]) {
    ev.bit = sample_bit(rs) ? 1 : 0;
    ev.double_click = true;
  } else {
    ev.bit = row[1] ? 1 : 0;
  }
  return ev;
}

/// Photo-counts reaching Eve's two sifted-basis detectors.
inline std::pair<std::uint64_t, std::uint64_t> eve_tap_counts(
    std::uint64_t undetected_signal, std::uint64_t undetected_orth,
    EveTapPolicy policy, RandomStream& rs) {
  if (policy == EveTapPolicy::kStoredMeasurement)
    return {undetected_signal, undetected_orth};
  return {sample_binomial_half(undetected_signal, rs),
          sample_binomial_half(undetected_orth, rs)};
}

/// Eve's bit from ideal photon-number-resolving detectors in the sifted
/// basis: the larger photo-count wins unambiguously; equal counts force a
/// uniformly random, flagged-ambiguous value.
inline EveBit eve_measure(std::uint64_t signal_count,
                          std::uint64_t orth_count, RandomStream& rs) {
  if (signal_count > orth_count) return {0, false};
  if (signal_count < orth_count) return {1, false};
  return {static_cast<std::uint8_t>(sample_bit(rs) ? 1 : 0), true};
}

/// Click probability of one detector fed by `dist`:
/// 1 - (1 - p_d) P[thin(dist, eta_d) = 0]. Cross-check for the Monte Carlo.
inline double analytic_click_probability(const PhotonDistribution& dist,
                                         const DetectorSpec& spec) {
  spec.validate();
  return 1.0 - (1.0 - spec.dark_count_probability) *
                   dist.thinned(spec.efficiency).vacuum_probability();
}

}  // namespace aqkd
