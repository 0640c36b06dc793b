#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "aqkd/distillation.hpp"
#include "aqkd/keyrate.hpp"
#include "aqkd/measurement.hpp"
#include "aqkd/optical_path.hpp"
#include "aqkd/photon_stats.hpp"
#include "aqkd/rng.hpp"

namespace aqkd {

/// Everything one session needs. `gad_rounds` is carried for transcript
/// assembly; distillation itself runs as a separate stage on the session's
/// sifted output.
struct SessionConfig {
  double mu = 1.5;
  AmplifierSpec amplifier{};
  FiberSpec fiber{};
  DetectorSpec detector{};
  PolarizationSpec polarization{};
  std::uint64_t n_pulses = 10'000'000;
  unsigned gad_rounds = 1;
  double f_ec = 1.16;
  std::uint64_t seed = 1;
  EveTapPolicy eve_tap = EveTapPolicy::kPassiveSplit;

  void validate() const {
    if (mu < 0.0) throw std::invalid_argument("mean photon number must be >= 0");
    if (n_pulses == 0) throw std::invalid_argument("pulse count must be >= 1");
    if (f_ec < 1.0) throw std::invalid_argument("EC inefficiency must be >= 1");
    amplifier.validate();
    fiber.validate();
    detector.validate();
    polarization.validate();
  }
};

enum class Direction : std::uint8_t { kAliceToBob, kBobToAlice };

enum class MessageKind : std::uint8_t {
  kQubits,
  kSiftingBases,
  kAdParity,
  kAdRejectionIndex,
  kEcInfo,
  kPaFunction,
  kAuthTagA,
  kAuthTagB,
};

struct TranscriptMessage {
  Direction direction;
  MessageKind kind;
  std::uint64_t payload_bits;

  friend bool operator==(const TranscriptMessage&,
                         const TranscriptMessage&) = default;
};

using Transcript = std::vector<TranscriptMessage>;

struct SessionStats {
  std::uint64_t pulses = 0;
  std::uint64_t resolved = 0;  ///< pulses where Bob announced a basis
  std::uint64_t sifted = 0;    ///< even-truncated sifted key length
  double bob_sifted_ber = 0.0;
  double eve_ambiguous_fraction = 0.0;
  double eve_unambiguous_ber = 0.0;
  double double_click_fraction = 0.0;  ///< of sifted events (pre-truncation)
  std::vector<RoundStats> distillation;  ///< filled once distillation has run
};

struct SessionResult {
  SiftedTriple keys;
  SessionStats stats;
  Transcript transcript;  ///< quantum + sifting rows; see complete_transcript
};

/// Pulses per deterministic work shard. Shard i always covers the same pulse
/// range and owns stream (seed, i), so output is identical for any worker
/// count.
inline constexpr std::uint64_t kShardPulses = 1ull << 16;

namespace detail {

struct ShardOutput {
  BitString alice;
  BitString bob;
  BitString eve_values;
  BitString eve_ambiguous;
  std::uint64_t resolved = 0;
  std::uint64_t double_clicks = 0;  // among sifted events
};

/// One shard of the pulse loop. Per-pulse draw order is fixed: Alice's bit,
/// pulse intensities, Bob's detected counts per mode, photon routing, dark
/// counts, event resolution, then (sifted events only) the tapped counts and
/// Eve's measurement.
///
/// Fiber loss and detector efficiency form one survival trial per photon, so
/// the tap's photon-number law is the source law thinned by 1 - eta_f eta_d.
/// Eve's counts are drawn from that law with fresh randomness rather than
/// from the very photons Bob's trials rejected: sharing the pulse's thermal
/// intensity would bunch her errors with Bob's ASE-induced errors, and the
/// passive-tapping security model requires the two error processes to be
/// independent. Her per-pulse marginals are exactly those of "every photon
/// Bob does not detect".
inline ShardOutput run_shard(const SessionConfig& cfg, std::uint64_t shard,
                             std::uint64_t pulses) {
  RandomStream rs = derive_stream(cfg.seed, shard);
  const double p_survive = transmittance(cfg.fiber) * cfg.detector.efficiency;
  const double p_dark = cfg.detector.dark_count_probability;
  const double p_pol = cfg.polarization.misroute_probability;
  const double gain = cfg.amplifier.gain;
  const double chi = cfg.amplifier.excess_noise;
  const double n_sp = chi * (gain - 1.0);
  const double tap_eta = 1.0 - p_survive;
  const PhotonDistribution tap_signal =
      PhotonDistribution::laguerre_gauss(gain * cfg.mu * tap_eta, n_sp * tap_eta);
  const PhotonDistribution tap_orth =
      PhotonDistribution::bose_einstein(n_sp * tap_eta);

  ShardOutput out;
  for (std::uint64_t n = 0; n < pulses; ++n) {
    const bool alice_bit = sample_bit(rs);
    const PulseIntensities in = sample_pulse_intensities(cfg.mu, gain, chi, rs);
    const std::uint64_t det_sig = sample_poisson(p_survive * in.signal, rs);
    const std::uint64_t det_orth =
        in.orth > 0.0 ? sample_poisson(p_survive * in.orth, rs) : 0;

    std::array<std::array<std::uint64_t, 2>, 2> counts{};
    route_detected(det_sig, det_orth, p_pol, rs, counts);
    const BobOutcome bob =
        clicks_from_counts(counts, p_dark, det_sig + det_orth, rs);
    const std::optional<ResolvedEvent> ev = resolve_event(bob, rs);
    if (!ev) continue;
    ++out.resolved;
    if (ev->basis != Basis::kPreparation) continue;

    const std::uint64_t undet_sig = tap_signal.sample(rs);
    const std::uint64_t undet_orth = n_sp > 0.0 ? tap_orth.sample(rs) : 0;
    const auto [tap_sig, tap_orth_count] =
        eve_tap_counts(undet_sig, undet_orth, cfg.eve_tap, rs);
    const EveBit eve = eve_measure(tap_sig, tap_orth_count, rs);

    out.alice.push_back(alice_bit);
    out.bob.push_back(alice_bit != (ev->bit != 0));
    out.eve_values.push_back(alice_bit != (eve.value != 0));
    out.eve_ambiguous.push_back(eve.ambiguous);
    if (ev->double_click) ++out.double_clicks;
  }
  return out;
}

}  // namespace detail

/// Run one full session: pulse generation, transmission, detection, sifting,
/// and the tap, producing aligned Alice/Bob/Eve keys, statistics, and the
/// quantum-phase transcript rows. Bit-identical output for a given
/// (config, seed) regardless of `workers` (0 = hardware concurrency).
inline SessionResult run_session(const SessionConfig& cfg, unsigned workers = 0) {
  cfg.validate();
  if (workers == 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t shard_count =
      (cfg.n_pulses + kShardPulses - 1) / kShardPulses;
  std::vector<detail::ShardOutput> shards(shard_count);

  auto pulses_in_shard = [&](std::uint64_t i) {
    const std::uint64_t begin = i * kShardPulses;
    return std::min(kShardPulses, cfg.n_pulses - begin);
  };
  if (workers <= 1 || shard_count <= 1) {
    for (std::uint64_t i = 0; i < shard_count; ++i)
      shards[i] = detail::run_shard(cfg, i, pulses_in_shard(i));
  } else {
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= shard_count) return;
        shards[i] = detail::run_shard(cfg, i, pulses_in_shard(i));
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SessionResult res;
  std::uint64_t double_clicks = 0;
  for (const detail::ShardOutput& s : shards) {  // fixed reduction order
    res.keys.alice.append(s.alice);
    res.keys.bob.append(s.bob);
    res.keys.eve_values.append(s.eve_values);
    res.keys.eve_ambiguous.append(s.eve_ambiguous);
    res.stats.resolved += s.resolved;
    double_clicks += s.double_clicks;
  }
  const std::uint64_t raw_sifted = res.keys.alice.size();
  const std::uint64_t even = raw_sifted - raw_sifted % 2;
  res.keys.alice.truncate(even);
  res.keys.bob.truncate(even);
  res.keys.eve_values.truncate(even);
  res.keys.eve_ambiguous.truncate(even);

  res.stats.pulses = cfg.n_pulses;
  res.stats.sifted = even;
  res.stats.bob_sifted_ber = bob_ber(res.keys);
  res.stats.eve_ambiguous_fraction = eve_ambiguous_fraction(res.keys);
  res.stats.eve_unambiguous_ber = eve_unambiguous_ber(res.keys);
  res.stats.double_click_fraction =
      raw_sifted == 0 ? 0.0
                      : static_cast<double>(double_clicks) /
                            static_cast<double>(raw_sifted);

  res.transcript.push_back(
      {Direction::kAliceToBob, MessageKind::kQubits, cfg.n_pulses});
  res.transcript.push_back(
      {Direction::kBobToAlice, MessageKind::kSiftingBases, res.stats.resolved});
  return res;
}

/// Basis reconciliation on explicit per-pulse records: keep exactly the
/// events Bob resolved in the preparation basis, then truncate to even
/// length. Eve's strings are not populated here (pre-tap view).
inline SiftedTriple sift(const BitString& alice_bits,
                         const std::vector<std::optional<ResolvedEvent>>& events) {
  if (alice_bits.size() != events.size())
    throw std::invalid_argument("per-pulse records must align");
  SiftedTriple t;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (!ev || ev->basis != Basis::kPreparation) continue;
    t.alice.push_back(alice_bits[i]);
    t.bob.push_back(alice_bits[i] != (ev->bit != 0));
  }
  const std::size_t even = t.alice.size() - t.alice.size() % 2;
  t.alice.truncate(even);
  t.bob.truncate(even);
  return t;
}

/// Secret bits per transmitted pulse for a finished session + distillation
/// pair. Zero distilled bits give zero yield (a diagnosable outcome, not an
/// error).
inline double secret_yield(const SessionStats& stats,
                           const DistillationOutcome& outcome, double f_ec) {
  return secret_yield(outcome.size(), stats.pulses, outcome.bob_ber(),
                      outcome.eve_ambiguous_fraction(),
                      outcome.eve_unambiguous_ber(), f_ec);
}

inline constexpr std::uint64_t kPaFunctionBits = 256;  ///< placeholder size
inline constexpr std::uint64_t kAuthTagBits = 128;     ///< placeholder size

/// Fixed-width bits needed to address one of `values` items.
inline std::uint64_t index_width_bits(std::uint64_t values) {
  return values <= 1 ? 0 : std::bit_width(values - 1);
}

struct TranscriptSizes {
  std::uint64_t ad_parity_bits = 0;
  std::uint64_t ad_rejection_bits = 0;
  std::uint64_t ec_info_bits = 0;
  std::uint64_t pa_function_bits = kPaFunctionBits;
  std::uint64_t auth_tag_bits = kAuthTagBits;
};

/// Message sizes for one distillation round on an N-bit sifted key plus the
/// post-processing rows: parity N/2 bits, |R| fixed-width indices, and
/// EC leakage ceil(f_ec h2(ber) |D|) bits.
inline TranscriptSizes transcript_sizes(std::uint64_t sifted_n,
                                        const RejectionIndex& rejected,
                                        double distilled_ber,
                                        std::uint64_t distilled_bits,
                                        double f_ec) {
  if (sifted_n % 2 != 0)
    throw std::invalid_argument("sifted length must be even");
  TranscriptSizes s;
  s.ad_parity_bits = sifted_n / 2;
  s.ad_rejection_bits = rejected.size() * index_width_bits(sifted_n / 2);
  s.ec_info_bits = static_cast<std::uint64_t>(std::ceil(
      f_ec * binary_entropy(distilled_ber) * static_cast<double>(distilled_bits)));
  return s;
}

/// Append the classical post-processing rows so the transcript carries the
/// full protocol sequence: per round parity (A to B) and rejection index
/// (B to A), then EC information, the PA function choice, and both
/// authentication tags.
inline void complete_transcript(Transcript& t, const DistillationOutcome& outcome,
                                double f_ec) {
  for (const RoundStats& r : outcome.rounds) {
    t.push_back({Direction::kAliceToBob, MessageKind::kAdParity,
                 r.input_length / 2});
    t.push_back({Direction::kBobToAlice, MessageKind::kAdRejectionIndex,
                 r.rejected * index_width_bits(r.input_length / 2)});
  }
  const std::uint64_t ec = static_cast<std::uint64_t>(
      std::ceil(f_ec * binary_entropy(outcome.bob_ber()) *
                static_cast<double>(outcome.size())));
  t.push_back({Direction::kAliceToBob, MessageKind::kEcInfo, ec});
  t.push_back({Direction::kAliceToBob, MessageKind::kPaFunction, kPaFunctionBits});
  t.push_back({Direction::kAliceToBob, MessageKind::kAuthTagA, kAuthTagBits});
  t.push_back({Direction::kBobToAlice, MessageKind::kAuthTagB, kAuthTagBits});
}

}  // namespace aqkd
