// aqkd: amplified-BB84 link simulator with a passive-tapping adversary,
// advantage distillation, and secret-yield accounting.
//
// Subcommands:
//   point     evaluate one configuration and print its yield breakdown
//   sweep     run a config-driven sweep and write the CSV
//   figure3   built-in four-curve reproduction preset
//   selftest  fast invariant checks

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aqkd/harness.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::string gnuplot;
  std::uint64_t seed = 0;
  std::uint64_t pulses = 0;
  std::vector<double> lengths;
  double alpha = 0.0;
  double eta_d = 0.0;
  double p_dark = 0.0;
  double p_pol = -1.0;
  double f_ec = 0.0;
  std::string takeoka_convention;
  std::string eve_tap;
  unsigned workers = 0;
  bool no_escalate = false;
};

void attach_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "sweep configuration file");
  cmd->add_option("--seed", o.seed, "base RNG seed");
  cmd->add_option("--pulses", o.pulses, "pulses per point");
  cmd->add_option("--out", o.out, "output CSV path");
  cmd->add_option("--L", o.lengths, "span lengths in km")->delimiter(',');
  cmd->add_option("--alpha", o.alpha, "fiber attenuation, dB/km");
  cmd->add_option("--eta-d", o.eta_d, "detector efficiency");
  cmd->add_option("--p-dark", o.p_dark, "dark count probability per gate");
  cmd->add_option("--p-pol", o.p_pol, "polarization error probability");
  cmd->add_option("--f-ec", o.f_ec, "error correction inefficiency");
  cmd->add_option("--takeoka-convention", o.takeoka_convention,
                  "capacity-bound transmittance: channel|channel-times-detector");
  cmd->add_option("--eve-tap", o.eve_tap,
                  "tap receiver model: passive-split|stored");
  cmd->add_option("--workers", o.workers, "worker threads (0 = hardware)");
  cmd->add_flag("--no-escalate", o.no_escalate,
                "disable the automatic pulse-budget escalation");
  cmd->add_option("--gnuplot", o.gnuplot, "also write a gnuplot script here");
}

void apply_common(const CLI::App* cmd, const CommonOpts& o, aqkd::SweepSpec& s) {
  if (cmd->count("--seed")) s.seed = o.seed;
  if (cmd->count("--pulses")) s.pulses = o.pulses;
  if (cmd->count("--out")) s.out_path = o.out;
  if (cmd->count("--L")) s.lengths_km = o.lengths;
  if (cmd->count("--alpha")) s.alpha = o.alpha;
  if (cmd->count("--eta-d")) s.eta_d = o.eta_d;
  if (cmd->count("--p-dark")) s.p_dark = o.p_dark;
  if (cmd->count("--p-pol")) s.p_pol = o.p_pol;
  if (cmd->count("--f-ec")) s.f_ec = o.f_ec;
  if (cmd->count("--takeoka-convention"))
    s.takeoka = aqkd::parse_takeoka_convention(o.takeoka_convention);
  if (cmd->count("--eve-tap")) s.eve_tap = aqkd::parse_eve_tap(o.eve_tap);
  if (o.no_escalate) s.auto_escalate = false;
}

const char* kind_name(aqkd::MessageKind k) {
  switch (k) {
    case aqkd::MessageKind::kQubits: return "qubits";
    case aqkd::MessageKind::kSiftingBases: return "sifting-bases";
    case aqkd::MessageKind::kAdParity: return "ad-parity";
    case aqkd::MessageKind::kAdRejectionIndex: return "ad-rejection-index";
    case aqkd::MessageKind::kEcInfo: return "ec-info";
    case aqkd::MessageKind::kPaFunction: return "pa-function";
    case aqkd::MessageKind::kAuthTagA: return "auth-tag-a";
    case aqkd::MessageKind::kAuthTagB: return "auth-tag-b";
  }
  return "?";
}

void print_point(const aqkd::PointOutcome& out, bool verbose) {
  const aqkd::YieldPoint& p = out.point;
  std::cout << "L_km: " << aqkd::format_value(p.length_km) << '\n'
            << "G: " << aqkd::format_value(p.gain) << '\n'
            << "mu: " << aqkd::format_value(p.mu) << '\n'
            << "rounds: " << p.rounds << '\n'
            << "sift_yield: " << aqkd::format_value(p.sift_yield) << '\n'
            << "ber_sift: " << aqkd::format_value(p.sifted_ber) << '\n'
            << "dist_yield: " << aqkd::format_value(p.distilled_yield) << '\n'
            << "ber_dist: " << aqkd::format_value(p.distilled_ber) << '\n'
            << "eve_delta: " << aqkd::format_value(p.eve_ambiguous) << '\n'
            << "eve_ber: " << aqkd::format_value(p.eve_ber) << '\n'
            << "secret_fraction: " << aqkd::format_value(p.secret_fraction) << '\n'
            << "secret_yield: " << aqkd::format_value(p.secret_yield) << '\n'
            << "takeoka_bound: " << aqkd::format_value(p.takeoka) << '\n';
  if (verbose) {
    std::cout << "sifted_bits: " << out.stats.sifted << '\n'
              << "resolved_events: " << out.stats.resolved << '\n'
              << "double_click_fraction: "
              << aqkd::format_value(out.stats.double_click_fraction) << '\n';
    for (const aqkd::TranscriptMessage& m : out.transcript) {
      std::cout << "transcript: "
                << (m.direction == aqkd::Direction::kAliceToBob ? "A->B" : "B->A")
                << ' ' << kind_name(m.kind) << ' ' << m.payload_bits
                << " bits\n";
    }
  }
}

int run_selftest(unsigned workers) {
  using namespace aqkd;
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "PASS " : "FAIL ") << what << '\n';
    if (!ok) ++failures;
  };

  {  // photon-number laws: normalization and reduction identities
    bool norm = true;
    for (auto d : {PhotonDistribution::poisson(1.5),
                   PhotonDistribution::bose_einstein(15.0),
                   PhotonDistribution::laguerre_gauss(27.2, 15.0),
                   PhotonDistribution::laguerre_gauss(0.272, 0.15)}) {
      double sum = 0.0;
      for (double p : d.pmf_table(d.tail_cutoff())) sum += p;
      norm = norm && sum >= 1.0 - 1e-9 && sum <= 1.0 + 1e-9;
    }
    check(norm, "pmf normalization at tail cutoff");

    bool reduce = true;
    const auto lg0 = PhotonDistribution::laguerre_gauss(0.0, 15.0);
    const auto be = PhotonDistribution::bose_einstein(15.0);
    const auto lgp = PhotonDistribution::laguerre_gauss(3.3, 0.0);
    const auto po = PhotonDistribution::poisson(3.3);
    for (std::uint64_t n = 0; n <= 200; ++n) {
      reduce = reduce && std::abs(lg0.pmf(n) - be.pmf(n)) < 1e-12 &&
               std::abs(lgp.pmf(n) - po.pmf(n)) < 1e-12;
    }
    check(reduce, "family reduction identities");
  }

  {  // sampler moments, 2e5 draws each
    bool ok = true;
    RandomStream rs = derive_stream(7, 0);
    for (auto d : {PhotonDistribution::poisson(1.5),
                   PhotonDistribution::bose_einstein(15.0),
                   PhotonDistribution::laguerre_gauss(27.2, 15.0)}) {
      const int n = 200'000;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += static_cast<double>(d.sample(rs));
      const double se = std::sqrt(d.variance() / n);
      ok = ok && std::abs(sum / n - d.mean()) < 5.0 * se;
    }
    check(ok, "sampler means within 5 sigma");
  }

  {  // distillation arithmetic and laws
    bool ok = std::abs(expected_distilled_ber(0.25) - 0.1) < 1e-15;
    const auto pd = distill_pair(BitString::from_string("0101"),
                                 BitString::from_string("0111"));
    ok = ok && pd.rejected.indices == std::vector<std::uint64_t>{1} &&
         pd.alice.to_string() == "0" && pd.bob.to_string() == "0";

    RandomStream rs = derive_stream(7, 1);
    SiftedTriple t;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
      const bool a = sample_bit(rs);
      t.alice.push_back(a);
      t.bob.push_back(uniform(rs) < 0.1 ? !a : a);
      const bool amb = uniform(rs) < 0.5;
      t.eve_values.push_back(amb ? sample_bit(rs) : a);
      t.eve_ambiguous.push_back(amb);
    }
    const auto out = gad(t, 1, rs);
    const double se_b = 3.0 * std::sqrt(0.012195 * (1 - 0.012195) /
                                        static_cast<double>(out.size()));
    const double se_d =
        3.0 * std::sqrt(0.75 * 0.25 / static_cast<double>(out.size()));
    ok = ok && std::abs(out.bob_ber() - 0.012195) < se_b;
    ok = ok && std::abs(out.eve_ambiguous_fraction() - 0.75) < se_d;
    check(ok, "advantage distillation pair laws");
  }

  {  // photon conservation through the receiver
    RandomStream rs = derive_stream(7, 2);
    bool ok = true;
    for (int i = 0; i < 200'000 && ok; ++i) {
      const auto [ns, no] = sample_amplified_pair(1.7, 16.0, 1.0, rs);
      const auto det = bob_detect(ns, no, DetectorSpec{0.2, 1e-5}, 0.01, rs);
      ok = det.bob.detected_photons + det.undetected_signal +
               det.undetected_orth ==
           ns + no;
    }
    check(ok, "per-pulse photon conservation");
  }

  {  // determinism across worker counts
    SessionConfig cfg;
    cfg.n_pulses = 200'000;
    cfg.amplifier = {16.0, 1.0};
    cfg.mu = 1.7;
    cfg.fiber = {50.0, 0.2};
    cfg.seed = 99;
    const auto a = run_session(cfg, 1);
    const auto b = run_session(cfg, workers == 0 ? 4 : workers);
    check(a.keys.alice == b.keys.alice && a.keys.bob == b.keys.bob &&
              a.keys.eve_values == b.keys.eve_values &&
              a.stats.resolved == b.stats.resolved,
          "worker-count invariance");
  }

  {  // rate formulas
    bool ok = std::abs(binary_entropy(0.5) - 1.0) < 1e-15;
    ok = ok && std::abs(takeoka_bound(0.5) - std::log2(3.0)) < 1e-12;
    ok = ok && secret_fraction(0.11, 0.0, 0.0, 1.0) == 0.0;
    ok = ok && std::abs(secret_fraction(0.0, 1.0, 0.0, 1.0) - 1.0) < 1e-15;
    check(ok, "rate formula spot values");
  }

  std::cout << (failures == 0 ? "selftest: all checks passed\n"
                              : "selftest: FAILURES\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Amplified-BB84 QKD link simulator"};
  app.require_subcommand(1);

  CommonOpts po, so, fo;
  double point_L = 100.0;
  double point_G = 1.0;
  double point_chi = 1.0;
  std::vector<double> point_mu = {1.5};
  std::vector<unsigned> point_rounds = {0, 1, 2, 3};
  bool point_verbose = false;

  CLI::App* point = app.add_subcommand("point", "evaluate one configuration");
  attach_common(point, po);
  point->add_option("--G", point_G, "amplifier gain");
  point->add_option("--chi", point_chi, "amplifier excess noise factor");
  point->add_option("--mu", point_mu, "mean photon number grid")->delimiter(',');
  point->add_option("--rounds", point_rounds, "distillation rounds grid")
      ->delimiter(',');
  point->add_flag("--verbose", point_verbose, "print stats and transcript");

  CLI::App* sweep = app.add_subcommand("sweep", "config-driven sweep");
  attach_common(sweep, so);

  CLI::App* fig3 = app.add_subcommand("figure3", "built-in reproduction preset");
  attach_common(fig3, fo);
  bool fig3_stretch = false;
  fig3->add_flag("--stretch", fig3_stretch,
                 "long-reach variant: eta_d=0.7, p_dark=1e-7, ultra-low-loss fiber");

  CLI::App* self = app.add_subcommand("selftest", "fast invariant checks");
  unsigned self_workers = 0;
  self->add_option("--workers", self_workers, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(point)) {
      aqkd::SweepSpec spec;
      if (!po.config.empty()) spec = aqkd::parse_config_file(po.config, spec);
      apply_common(point, po, spec);
      if (point->count("--L")) point_L = po.lengths.front();
      spec.lengths_km = {point_L};
      aqkd::CurveSpec curve{"point", point_G, point_chi, point_mu, point_rounds};
      spec.curves = {curve};
      spec.validate();
      const auto out = aqkd::run_point(
          spec, curve, point_L, aqkd::derive_seed(spec.seed, 1, 1), po.workers);
      print_point(out, point_verbose);
      return 0;
    }
    if (app.got_subcommand(sweep)) {
      aqkd::SweepSpec spec;
      if (so.config.empty() && sweep->count("--L") == 0)
        throw std::runtime_error("sweep requires --config (or full flags)");
      if (!so.config.empty()) spec = aqkd::parse_config_file(so.config, spec);
      apply_common(sweep, so, spec);
      if (spec.out_path.empty()) spec.out_path = "sweep.csv";
      const auto results = aqkd::run_sweep(spec, so.workers, &std::cerr);
      aqkd::emit_csv(results, spec.out_path);
      if (!so.gnuplot.empty())
        aqkd::write_gnuplot_script(so.gnuplot, spec.out_path, results);
      for (const auto& c : results)
        std::cout << c.label << " max range at 1e-6: "
                  << aqkd::format_value(aqkd::max_range(c, 1e-6)) << " km\n";
      return 0;
    }
    if (app.got_subcommand(fig3)) {
      aqkd::SweepSpec spec =
          fig3_stretch ? aqkd::stretch_spec() : aqkd::figure3_spec();
      if (!fo.config.empty()) spec = aqkd::parse_config_file(fo.config, spec);
      apply_common(fig3, fo, spec);
      if (spec.out_path.empty())
        spec.out_path = fig3_stretch ? "figure3_stretch.csv" : "figure3.csv";
      const auto results = aqkd::run_sweep(spec, fo.workers, &std::cerr);
      aqkd::emit_csv(results, spec.out_path);
      if (!fo.gnuplot.empty())
        aqkd::write_gnuplot_script(fo.gnuplot, spec.out_path, results);
      std::cout << "wrote " << spec.out_path << '\n';
      for (const auto& c : results)
        std::cout << c.label << " max range at 1e-6: "
                  << aqkd::format_value(aqkd::max_range(c, 1e-6)) << " km\n";
      return 0;
    }
    if (app.got_subcommand(self)) return run_selftest(self_workers);
  } catch (const std::exception& e) {
    std::cerr << "aqkd: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
