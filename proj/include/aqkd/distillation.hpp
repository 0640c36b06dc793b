#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aqkd/bitstring.hpp"
#include "aqkd/rng.hpp"

namespace aqkd {

/// Aligned sifted keys: Alice's and Bob's bits plus Eve's values with her
/// per-bit ambiguity flags (flag set = ambiguous, value was uniform).
/// All four strings have the same even length; index i traces to one pulse.
struct SiftedTriple {
  BitString alice;
  BitString bob;
  BitString eve_values;
  BitString eve_ambiguous;

  std::size_t size() const { return alice.size(); }

  void validate() const {
    if (alice.size() != bob.size() || alice.size() != eve_values.size() ||
        alice.size() != eve_ambiguous.size())
      throw std::invalid_argument("sifted keys must have equal lengths");
    if (alice.size() % 2 != 0)
      throw std::invalid_argument("sifted key length must be even");
  }
};

/// Bob's error rate against Alice's ground truth.
inline double bob_ber(const SiftedTriple& t) {
  return t.size() == 0
             ? 0.0
             : static_cast<double>(BitString::hamming_distance(t.alice, t.bob)) /
                   static_cast<double>(t.size());
}

inline double eve_ambiguous_fraction(const SiftedTriple& t) {
  return t.size() == 0 ? 0.0
                       : static_cast<double>(t.eve_ambiguous.count_ones()) /
                             static_cast<double>(t.size());
}

inline double eve_unambiguous_ber(const SiftedTriple& t) {
  std::size_t unambiguous = 0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.eve_ambiguous[i]) continue;
    ++unambiguous;
    if (t.eve_values[i] != t.alice[i]) ++errors;
  }
  return unambiguous == 0
             ? 0.0
             : static_cast<double>(errors) / static_cast<double>(unambiguous);
}

using ParitySequence = BitString;

/// Sorted positions i where Bob's pair parity disagreed with Alice's.
struct RejectionIndex {
  std::vector<std::uint64_t> indices;

  std::size_t size() const { return indices.size(); }
};

namespace detail {
inline void require_even(const BitString& key) {
  if (key.size() % 2 != 0)
    throw std::invalid_argument("advantage distillation requires even length");
}
}  // namespace detail

/// P = { p_i = x_{2i+1} xor x_{2i} }, length N/2.
inline ParitySequence parity_sequence(const BitString& key) {
  detail::require_even(key);
  ParitySequence p;
  p.reserve(key.size() / 2);
  for (std::size_t i = 0; i + 1 < key.size(); i += 2)
    p.push_back(key[i] != key[i + 1]);
  return p;
}

/// F = { f_i = x_{2i} }, length N/2.
inline BitString even_subsequence(const BitString& key) {
  detail::require_even(key);
  BitString f;
  f.reserve(key.size() / 2);
  for (std::size_t i = 0; i < key.size(); i += 2) f.push_back(key[i]);
  return f;
}

struct PairDistillation {
  BitString alice;
  BitString bob;
  RejectionIndex rejected;
};

/// One round of pairwise distillation between Alice and Bob: both compute
/// pair parities, positions with mismatched parity are rejected, and the
/// even-index bit of each surviving pair is kept. Parity sequences are
/// discarded and never enter a key.
inline PairDistillation distill_pair(const BitString& alice,
                                     const BitString& bob) {
  if (alice.size() != bob.size())
    throw std::invalid_argument("key length mismatch");
  detail::require_even(alice);
  PairDistillation out;
  out.alice.reserve(alice.size() / 2);
  out.bob.reserve(alice.size() / 2);
  for (std::size_t i = 0; i + 1 < alice.size(); i += 2) {
    const bool pa = alice[i] != alice[i + 1];
    const bool pb = bob[i] != bob[i + 1];
    if (pa == pb) {
      out.alice.push_back(alice[i]);
      out.bob.push_back(bob[i]);
    } else {
      out.rejected.indices.push_back(i / 2);
    }
  }
  return out;
}

/// Eve's side of a round: a kept pair yields an unambiguous distilled bit
/// (her even-index value) only when both sifted bits of the pair were
/// unambiguous; otherwise the distilled bit is ambiguous and re-drawn
/// uniformly so the ambiguity invariant is preserved.
inline std::pair<BitString, BitString> distill_eve(const BitString& values,
                                                   const BitString& ambiguous,
                                                   const RejectionIndex& rejected,
                                                   RandomStream& rs) {
  if (values.size() != ambiguous.size())
    throw std::invalid_argument("eve value/flag length mismatch");
  detail::require_even(values);
  BitString out_values;
  BitString out_flags;
  out_values.reserve(values.size() / 2);
  out_flags.reserve(values.size() / 2);
  std::size_t next_rejected = 0;
  for (std::size_t i = 0; i + 1 < values.size(); i += 2) {
    const std::uint64_t pair_index = i / 2;
    if (next_rejected < rejected.indices.size() &&
        rejected.indices[next_rejected] == pair_index) {
      ++next_rejected;
      continue;
    }
    if (!ambiguous[i] && !ambiguous[i + 1]) {
      out_values.push_back(values[i]);
      out_flags.push_back(false);
    } else {
      out_values.push_back(sample_bit(rs));
      out_flags.push_back(true);
    }
  }
  if (next_rejected != rejected.indices.size())
    throw std::invalid_argument("rejection index out of range");
  return {std::move(out_values), std::move(out_flags)};
}

struct RoundStats {
  std::uint64_t input_length = 0;
  std::uint64_t rejected = 0;
  std::uint64_t output_length = 0;
  double bob_ber_before = 0.0;
  double bob_ber_after = 0.0;
  double eve_ambiguous_before = 0.0;
  double eve_ambiguous_after = 0.0;
  double eve_unambiguous_ber_before = 0.0;
  double eve_unambiguous_ber_after = 0.0;
};

/// Distilled keys plus per-round bookkeeping. `last_rejection` is the
/// rejection index of the final round executed (empty for zero rounds).
struct DistillationOutcome {
  SiftedTriple keys;
  RejectionIndex last_rejection;
  std::vector<RoundStats> rounds;

  std::size_t size() const { return keys.size(); }

  double bob_ber() const { return aqkd::bob_ber(keys); }
  double eve_ambiguous_fraction() const {
    return aqkd::eve_ambiguous_fraction(keys);
  }
  double eve_unambiguous_ber() const { return aqkd::eve_unambiguous_ber(keys); }
};

/// Generalized advantage distillation: `rounds` iterations of pairing,
/// parity comparison, rejection, and Eve ambiguity propagation. Zero rounds
/// is a pass-through (plain BB84 post-processing). Odd intermediate lengths
/// drop their final bit.
inline DistillationOutcome gad(const SiftedTriple& triple, unsigned rounds,
                               RandomStream& rs) {
  triple.validate();
  DistillationOutcome out;
  out.keys = triple;
  for (unsigned r = 0; r < rounds; ++r) {
    SiftedTriple& k = out.keys;
    if (k.size() % 2 != 0) {
      const std::size_t even = k.size() - 1;
      k.alice.truncate(even);
      k.bob.truncate(even);
      k.eve_values.truncate(even);
      k.eve_ambiguous.truncate(even);
    }
    RoundStats st;
    st.input_length = k.size();
    if (k.size() > 0) {
      st.bob_ber_before =
          static_cast<double>(BitString::hamming_distance(k.alice, k.bob)) /
          static_cast<double>(k.size());
      st.eve_ambiguous_before =
          static_cast<double>(k.eve_ambiguous.count_ones()) /
          static_cast<double>(k.size());
    }
    st.eve_unambiguous_ber_before = out.eve_unambiguous_ber();

    PairDistillation pd = distill_pair(k.alice, k.bob);
    auto [e_values, e_flags] =
        distill_eve(k.eve_values, k.eve_ambiguous, pd.rejected, rs);
    k.alice = std::move(pd.alice);
    k.bob = std::move(pd.bob);
    k.eve_values = std::move(e_values);
    k.eve_ambiguous = std::move(e_flags);
    out.last_rejection = std::move(pd.rejected);

    st.rejected = out.last_rejection.size();
    st.output_length = k.size();
    st.bob_ber_after = out.bob_ber();
    st.eve_ambiguous_after = out.eve_ambiguous_fraction();
    st.eve_unambiguous_ber_after = out.eve_unambiguous_ber();
    out.rounds.push_back(st);
  }
  return out;
}

/// Distilled BER of one round over independent errors at rate e:
/// both bits of a kept pair are wrong with odds e^2 against (1-e)^2.
inline double expected_distilled_ber(double e) {
  if (e < 0.0 || e > 0.5)
    throw std::invalid_argument("error rate must be in [0, 0.5]");
  const double both = e * e;
  const double neither = (1.0 - e) * (1.0 - e);
  return both + neither == 0.0 ? 0.0 : both / (both + neither);
}

}  // namespace aqkd
