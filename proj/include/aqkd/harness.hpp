#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqkd/keyrate.hpp"
#include "aqkd/protocol_session.hpp"

namespace aqkd {

/// Escalated pulse budget used when a point collects too few sifted bits.
inline constexpr std::uint64_t kEscalatedPulses = 100'000'000;
/// Sifted-bit floor below which a point escalates.
inline constexpr std::uint64_t kEscalationThreshold = 10'000;

struct CurveSpec {
  std::string label;
  double gain = 1.0;
  double chi = 1.0;
  std::vector<double> mu_grid = {1.5};
  std::vector<unsigned> rounds_grid = {0};

  void validate() const {
    if (label.empty()) throw std::invalid_argument("curve label must be nonempty");
    if (mu_grid.empty() || rounds_grid.empty())
      throw std::invalid_argument("mu/rounds grids must be nonempty");
    AmplifierSpec{gain, chi}.validate();
  }
};

struct SweepSpec {
  std::vector<double> lengths_km;
  std::vector<CurveSpec> curves;
  double alpha = kStandardSmfAttenuationDbPerKm;
  double eta_d = 0.2;
  double p_dark = 1.2e-5;
  double p_pol = 0.01;
  double f_ec = 1.16;
  std::uint64_t pulses = 10'000'000;
  bool auto_escalate = true;
  std::uint64_t seed = 1;
  EveTapPolicy eve_tap = EveTapPolicy::kPassiveSplit;
  TakeokaConvention takeoka = TakeokaConvention::kChannelTimesDetector;
  FilterSpec filter{};
  std::string out_path;

  void validate() const {
    if (lengths_km.empty()) throw std::invalid_argument("no span lengths given");
    for (std::size_t i = 1; i < lengths_km.size(); ++i)
      if (lengths_km[i] <= lengths_km[i - 1])
        throw std::invalid_argument("span lengths must be strictly increasing");
    if (curves.empty()) throw std::invalid_argument("no curves given");
    for (const CurveSpec& c : curves) c.validate();
    if (pulses < 10'000)
      throw std::invalid_argument("at least 1e4 pulses per point required");
    filter.validate();
    SessionConfig probe;
    probe.mu = 0.0;
    probe.fiber = {lengths_km.front(), alpha};
    probe.detector = {eta_d, p_dark};
    probe.polarization = {p_pol};
    probe.f_ec = f_ec;
    probe.validate();
  }
};

struct CurveResult {
  std::string label;
  std::vector<YieldPoint> points;
};

/// Full detail of one evaluated point (kept by the `point` command; sweeps
/// retain only the YieldPoint).
struct PointOutcome {
  YieldPoint point;
  SessionStats stats;
  DistillationOutcome distillation;
  Transcript transcript;
};

namespace detail {

inline double takeoka_for(const SweepSpec& sweep, double length_km) {
  const double eta_f = transmittance(FiberSpec{length_km, sweep.alpha});
  const double eta = sweep.takeoka == TakeokaConvention::kChannelTimesDetector
                         ? eta_f * sweep.eta_d
                         : eta_f;
  return eta < 1.0 ? takeoka_bound(eta)
                   : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Evaluate one (curve, span) point: run the session per mu candidate
/// (escalating the pulse budget if the sifted sample is too small), apply
/// every rounds candidate to the sifted keys, and keep the (mu, rounds) pair
/// with the best secret yield.
inline PointOutcome run_point(const SweepSpec& sweep, const CurveSpec& curve,
                              double length_km, std::uint64_t point_seed,
                              unsigned workers = 0) {
  PointOutcome best;
  bool have_best = false;
  for (std::size_t mu_idx = 0; mu_idx < curve.mu_grid.size(); ++mu_idx) {
    SessionConfig cfg;
    cfg.mu = curve.mu_grid[mu_idx];
    cfg.amplifier = {curve.gain, curve.chi};
    cfg.fiber = {length_km, sweep.alpha};
    cfg.detector = {sweep.eta_d, sweep.p_dark};
    cfg.polarization = {sweep.p_pol};
    cfg.n_pulses = sweep.pulses;
    cfg.f_ec = sweep.f_ec;
    cfg.seed = derive_seed(point_seed, mu_idx);
    cfg.eve_tap = sweep.eve_tap;

    SessionResult session = run_session(cfg, workers);
    if (sweep.auto_escalate && session.stats.sifted < kEscalationThreshold &&
        cfg.n_pulses < kEscalatedPulses) {
      cfg.n_pulses = kEscalatedPulses;
      session = run_session(cfg, workers);
    }

    for (unsigned rounds : curve.rounds_grid) {
      RandomStream gad_rs =
          derive_stream(cfg.seed, 0xffff'ffff'0000'0000ull + rounds);
      DistillationOutcome dist = gad(session.keys, rounds, gad_rs);
      const double r =
          secret_fraction(dist.bob_ber(), dist.eve_ambiguous_fraction(),
                          dist.eve_unambiguous_ber(), sweep.f_ec);
      const double yield = secret_yield(session.stats, dist, sweep.f_ec);
      if (have_best && yield <= best.point.secret_yield) continue;
      have_best = true;
      best.point.length_km = length_km;
      best.point.gain = curve.gain;
      best.point.mu = cfg.mu;
      best.point.rounds = rounds;
      best.point.sift_yield = static_cast<double>(session.stats.sifted) /
                              static_cast<double>(cfg.n_pulses);
      best.point.sifted_ber = session.stats.bob_sifted_ber;
      best.point.distilled_yield = static_cast<double>(dist.size()) /
                                   static_cast<double>(cfg.n_pulses);
      best.point.distilled_ber = dist.bob_ber();
      best.point.eve_ambiguous = dist.eve_ambiguous_fraction();
      best.point.eve_ber = dist.eve_unambiguous_ber();
      best.point.secret_fraction = r;
      best.point.secret_yield = yield;
      best.point.takeoka = detail::takeoka_for(sweep, length_km);
      best.stats = session.stats;
      best.stats.distillation = dist.rounds;
      best.transcript = session.transcript;
      complete_transcript(best.transcript, dist, sweep.f_ec);
      best.distillation = std::move(dist);
    }
  }
  return best;
}

/// Run every (curve, span) point of the sweep. Deterministic for a fixed
/// seed: point seeds derive from (seed, curve index, span index) and shard
/// streams from those, so the result is identical for any worker count.
inline std::vector<CurveResult> run_sweep(const SweepSpec& sweep,
                                          unsigned workers = 0,
                                          std::ostream* diag = nullptr) {
  sweep.validate();
  std::vector<CurveResult> results;
  results.reserve(sweep.curves.size());
  for (std::size_t c = 0; c < sweep.curves.size(); ++c) {
    CurveResult cr;
    cr.label = sweep.curves[c].label;
    for (std::size_t l = 0; l < sweep.lengths_km.size(); ++l) {
      const std::uint64_t point_seed = derive_seed(sweep.seed, c + 1, l + 1);
      PointOutcome out = run_point(sweep, sweep.curves[c],
                                   sweep.lengths_km[l], point_seed, workers);
      if (diag) {
        *diag << "aqkd: " << cr.label << " L=" << sweep.lengths_km[l]
              << " km sifted=" << out.stats.sifted
              << " yield=" << out.point.secret_yield;
        if (out.stats.sifted == 0) *diag << " (no sifted bits)";
        *diag << '\n';
      }
      cr.points.push_back(out.point);
    }
    results.push_back(std::move(cr));
  }
  return results;
}

/// Largest span on the grid whose value stays at or above `floor`, refined
/// by linear interpolation in log-value toward the first grid point below.
/// Returns 0 when the whole curve is below the floor.
inline double crossing_distance(const std::vector<double>& lengths,
                                const std::vector<double>& values,
                                double floor) {
  if (floor <= 0.0) throw std::invalid_argument("floor must be positive");
  if (lengths.size() != values.size())
    throw std::invalid_argument("grid size mismatch");
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] >= floor) last = static_cast<std::ptrdiff_t>(i);
  if (last < 0) return 0.0;
  const std::size_t i = static_cast<std::size_t>(last);
  if (i + 1 >= lengths.size()) return lengths[i];
  const double y0 = values[i];
  const double y1 = values[i + 1];
  if (y1 <= 0.0) return lengths[i];
  const double t = (std::log(y0) - std::log(floor)) /
                   (std::log(y0) - std::log(y1));
  return lengths[i] + t * (lengths[i + 1] - lengths[i]);
}

/// Maximum range of a curve at the given secret-yield floor.
inline double max_range(const CurveResult& curve, double floor) {
  std::vector<double> lengths;
  std::vector<double> yields;
  lengths.reserve(curve.points.size());
  yields.reserve(curve.points.size());
  for (const YieldPoint& p : curve.points) {
    lengths.push_back(p.length_km);
    yields.push_back(p.secret_yield);
  }
  return crossing_distance(lengths, yields, floor);
}

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_value(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view kCsvHeader =
    "curve,L_km,G,mu,rounds,sift_yield,ber_sift,dist_yield,ber_dist,"
    "eve_delta,eve_ber,secret_fraction,secret_yield,takeoka_bound";

inline void emit_csv(const std::vector<CurveResult>& results,
                     std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const CurveResult& curve : results) {
    for (const YieldPoint& p : curve.points) {
      os << curve.label << ',' << format_value(p.length_km) << ','
         << format_value(p.gain) << ',' << format_value(p.mu) << ','
         << p.rounds << ',' << format_value(p.sift_yield) << ','
         << format_value(p.sifted_ber) << ',' << format_value(p.distilled_yield)
         << ',' << format_value(p.distilled_ber) << ','
         << format_value(p.eve_ambiguous) << ',' << format_value(p.eve_ber)
         << ',' << format_value(p.secret_fraction) << ','
         << format_value(p.secret_yield) << ',' << format_value(p.takeoka)
         << '\n';
    }
  }
}

inline void emit_csv(const std::vector<CurveResult>& results,
                     const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  emit_csv(results, f);
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

/// Gnuplot companion script for a sweep CSV (plotting stays external; the
/// CSV is the contract).
inline void write_gnuplot_script(const std::string& script_path,
                                 const std::string& csv_path,
                                 const std::vector<CurveResult>& results) {
  std::ofstream f(script_path);
  if (!f) throw std::runtime_error("cannot open for writing: " + script_path);
  f << "set datafile separator ','\n"
    << "set logscale y\n"
    << "set xlabel 'span length (km)'\n"
    << "set ylabel 'secret bits per pulse'\n"
    << "set yrange [1e-8:1]\n"
    << "set key bottom left\n";
  f << "plot ";
  for (std::size_t i = 0; i < results.size(); ++i) {
    f << "'" << csv_path << "' using 2:($13 > 0 && strcol(1) eq '"
      << results[i].label << "' ? $13 : 1/0) with linespoints title '"
      << results[i].label << "', ";
  }
  f << "'" << csv_path << "' using 2:(strcol(1) eq '"
    << results.front().label << "' ? $14 : 1/0) with lines title 'capacity bound'\n";
  if (!f) throw std::runtime_error("write failed: " + script_path);
}

/// The built-in reproduction preset: standard BB84, BB84 plus one round of
/// advantage distillation, the G = 4/3 cloning-gain configuration, and the
/// high-gain G = 16 configuration, on a span grid reaching 300 km.
inline SweepSpec figure3_spec() {
  SweepSpec s;
  s.lengths_km = {60, 80, 100, 120};
  // 5-km resolution across the range cliffs of all four curves
  for (double L = 130; L <= 300.5; L += 5) s.lengths_km.push_back(L);
  s.curves = {
      {"bb84", 1.0, 1.0, {1.5}, {0}},
      {"gad", 1.0, 1.0, {1.5}, {0, 1}},
      {"g4over3", 4.0 / 3.0, 1.0, {2.5}, {0, 1}},
      {"g16", 16.0, 1.0, {1.7}, {0, 1}},
  };
  return s;
}

/// High-efficiency low-noise detectors on ultra-low-loss fiber; used for the
/// long-reach variant of the G = 16 configuration.
inline SweepSpec stretch_spec() {
  SweepSpec s;
  for (double L = 240; L <= 400.5; L += 10) s.lengths_km.push_back(L);
  s.curves = {{"g16-stretch", 16.0, 1.0, {1.7}, {0, 1}}};
  s.alpha = kUltraLowLossSmfAttenuationDbPerKm;
  s.eta_d = 0.7;
  s.p_dark = 1e-7;
  return s;
}

// ---------------------------------------------------------------------------
// Flat key = value configuration files, sections [global] and [curve.<label>].
// Keys mirror the CLI flags; unknown keys are hard errors.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string_view::npos ? std::string()
                                     : std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::exchange(cur, {}));
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config line " + std::to_string(line) +
                             ": bad number '" + v + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::runtime_error("config line " + std::to_string(line) +
                             ": bad integer '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config line " + std::to_string(line) +
                           ": bad boolean '" + v + "'");
}

}  // namespace detail

inline EveTapPolicy parse_eve_tap(const std::string& v) {
  if (v == "passive-split" || v == "split") return EveTapPolicy::kPassiveSplit;
  if (v == "stored" || v == "stored-measurement")
    return EveTapPolicy::kStoredMeasurement;
  throw std::runtime_error("unknown eve-tap policy '" + v +
                           "' (expected passive-split or stored)");
}

inline TakeokaConvention parse_takeoka_convention(const std::string& v) {
  if (v == "channel-times-detector")
    return TakeokaConvention::kChannelTimesDetector;
  if (v == "channel") return TakeokaConvention::kChannelOnly;
  throw std::runtime_error("unknown takeoka convention '" + v +
                           "' (expected channel or channel-times-detector)");
}

/// Parse a sweep configuration. `base` supplies defaults (so a preset can be
/// amended by a file). Unknown sections or keys abort with the line number:
/// a silently ignored physics parameter is worse than an error.
inline SweepSpec parse_config(std::istream& in, SweepSpec base = SweepSpec{}) {
  SweepSpec spec = std::move(base);
  std::string section = "global";
  CurveSpec* curve = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
      const std::string name = detail::trim(t.substr(1, t.size() - 2));
      if (name == "global") {
        section = "global";
        curve = nullptr;
      } else if (name.rfind("curve.", 0) == 0) {
        const std::string label = name.substr(6);
        if (label.empty())
          throw std::runtime_error("config line " + std::to_string(lineno) +
                                   ": empty curve label");
        auto it = std::find_if(spec.curves.begin(), spec.curves.end(),
                               [&](const CurveSpec& c) { return c.label == label; });
        if (it == spec.curves.end()) {
          spec.curves.push_back(CurveSpec{label});
          curve = &spec.curves.back();
        } else {
          curve = &*it;
        }
        section = name;
      } else {
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unknown section '" + name + "'");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (curve == nullptr) {
      if (key == "seed") spec.seed = detail::parse_u64(value, lineno);
      else if (key == "pulses") spec.pulses = detail::parse_u64(value, lineno);
      else if (key == "out") spec.out_path = value;
      else if (key == "L") {
        spec.lengths_km.clear();
        for (const std::string& v : detail::split_list(value))
          spec.lengths_km.push_back(detail::parse_double(v, lineno));
      } else if (key == "alpha") spec.alpha = detail::parse_double(value, lineno);
      else if (key == "eta-d") spec.eta_d = detail::parse_double(value, lineno);
      else if (key == "p-dark") spec.p_dark = detail::parse_double(value, lineno);
      else if (key == "p-pol") spec.p_pol = detail::parse_double(value, lineno);
      else if (key == "f-ec") spec.f_ec = detail::parse_double(value, lineno);
      else if (key == "auto-escalate")
        spec.auto_escalate = detail::parse_bool(value, lineno);
      else if (key == "eve-tap") spec.eve_tap = parse_eve_tap(value);
      else if (key == "takeoka-convention")
        spec.takeoka = parse_takeoka_convention(value);
      else if (key == "single-longitudinal-mode")
        spec.filter.single_longitudinal_mode = detail::parse_bool(value, lineno);
      else if (key == "out-of-band-rejection")
        spec.filter.out_of_band_rejection_db = detail::parse_double(value, lineno);
      else
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unknown key '" + key + "'");
    } else {
      if (key == "G") curve->gain = detail::parse_double(value, lineno);
      else if (key == "chi") curve->chi = detail::parse_double(value, lineno);
      else if (key == "mu") {
        curve->mu_grid.clear();
        for (const std::string& v : detail::split_list(value))
          curve->mu_grid.push_back(detail::parse_double(v, lineno));
      } else if (key == "rounds") {
        curve->rounds_grid.clear();
        for (const std::string& v : detail::split_list(value))
          curve->rounds_grid.push_back(
              static_cast<unsigned>(detail::parse_u64(v, lineno)));
      } else {
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unknown curve key '" + key + "'");
      }
    }
  }
  return spec;
}

inline SweepSpec parse_config_file(const std::string& path,
                                   SweepSpec base = SweepSpec{}) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  return parse_config(f, std::move(base));
}

}  // namespace aqkd
