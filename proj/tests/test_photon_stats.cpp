#include <doctest.h>

#include <cmath>
#include <vector>

#include "aqkd/photon_stats.hpp"
#include "support.hpp"

using aqkd::PhotonDistribution;
using aqkd::RandomStream;

namespace {

double pmf_sum(const PhotonDistribution& d) {
  double sum = 0.0;
  for (double p : d.pmf_table(d.tail_cutoff())) sum += p;
  return sum;
}

}  // namespace

TEST_CASE("pmf closed forms at fixed points") {
  CHECK(PhotonDistribution::poisson(1.5).pmf(0) ==
        doctest::Approx(std::exp(-1.5)).epsilon(1e-14));
  CHECK(PhotonDistribution::bose_einstein(15.0).pmf(0) ==
        doctest::Approx(0.0625).epsilon(1e-14));
  // geometric law: p(n) = N^n/(1+N)^(n+1)
  CHECK(PhotonDistribution::bose_einstein(15.0).pmf(3) ==
        doctest::Approx(std::pow(15.0 / 16.0, 3) / 16.0).epsilon(1e-13));
  CHECK(PhotonDistribution::poisson(0.0).pmf(0) == 1.0);
  CHECK(PhotonDistribution::poisson(0.0).pmf(2) == 0.0);
}

TEST_CASE("vacuum probabilities") {
  CHECK(PhotonDistribution::poisson(0.0).vacuum_probability() == 1.0);
  CHECK(PhotonDistribution::bose_einstein(1.0).vacuum_probability() ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(PhotonDistribution::laguerre_gauss(27.2, 15.0).vacuum_probability() ==
        doctest::Approx(std::exp(-1.7) / 16.0).epsilon(1e-14));
  // vacuum term equals pmf(0) for every law
  for (const auto& d :
       {PhotonDistribution::poisson(1.5), PhotonDistribution::bose_einstein(0.3),
        PhotonDistribution::laguerre_gauss(3.3, 0.33)}) {
    CHECK(d.vacuum_probability() == doctest::Approx(d.pmf(0)).epsilon(1e-13));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(PhotonDistribution::poisson(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(PhotonDistribution::bose_einstein(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(PhotonDistribution::laguerre_gauss(-1.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(PhotonDistribution::laguerre_gauss(1.0, -2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(PhotonDistribution::poisson(1.0).thinned(1.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(PhotonDistribution::poisson(1.0).thinned(-0.1),
                  std::invalid_argument);
}

TEST_CASE("normalization at the tail cutoff") {
  for (const auto& d :
       {PhotonDistribution::poisson(1.5), PhotonDistribution::poisson(0.015),
        PhotonDistribution::bose_einstein(15.0),
        PhotonDistribution::laguerre_gauss(27.2, 15.0),
        PhotonDistribution::laguerre_gauss(0.272, 0.15),
        PhotonDistribution::laguerre_gauss(3.33, 0.33)}) {
    const double sum = pmf_sum(d);
    CHECK(sum >= 1.0 - 1e-9);
    CHECK(sum <= 1.0 + 1e-9);
  }
}

TEST_CASE("reduction identities: LG(0,N) = BE(N), LG(S,0) = Poisson(S)") {
  const auto lg_thermal = PhotonDistribution::laguerre_gauss(0.0, 15.0);
  const auto be = PhotonDistribution::bose_einstein(15.0);
  const auto lg_coherent = PhotonDistribution::laguerre_gauss(3.3, 0.0);
  const auto poisson = PhotonDistribution::poisson(3.3);
  for (std::uint64_t n = 0; n <= 400; ++n) {
    CHECK(std::abs(lg_thermal.pmf(n) - be.pmf(n)) < 1e-12);
    CHECK(std::abs(lg_coherent.pmf(n) - poisson.pmf(n)) < 1e-12);
  }
}

TEST_CASE("pmf matches analytic moments") {
  for (const auto& d : {PhotonDistribution::laguerre_gauss(27.2, 15.0),
                        PhotonDistribution::laguerre_gauss(3.33, 0.33),
                        PhotonDistribution::bose_einstein(0.15)}) {
    const auto table = d.pmf_table(d.tail_cutoff());
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t n = 0; n < table.size(); ++n) {
      mean += static_cast<double>(n) * table[n];
      second += static_cast<double>(n) * static_cast<double>(n) * table[n];
    }
    CHECK(mean == doctest::Approx(d.mean()).epsilon(1e-9));
    CHECK(second - mean * mean == doctest::Approx(d.variance()).epsilon(1e-8));
  }
}

TEST_CASE("LG pmf matches the P-representation oracle histogram") {
  // 1e6 draws here; the acceptance suite repeats this at 1e7.
  const double S = 27.2;
  const double N = 15.0;
  const auto d = PhotonDistribution::laguerre_gauss(S, N);
  const std::uint64_t draws = 1'000'000;
  oracle::PRepOracle orc(20240811);
  std::vector<std::uint64_t> hist(201, 0);
  for (std::uint64_t i = 0; i < draws; ++i) {
    const std::uint64_t n = orc.draw(S, N);
    if (n < hist.size()) ++hist[n];
  }
  const auto probs = d.pmf_table(200);
  for (std::size_t n = 0; n <= 200; ++n) {
    const double e = probs[n] * static_cast<double>(draws);
    const double sigma =
        std::sqrt(probs[n] * (1.0 - probs[n]) * static_cast<double>(draws));
    CHECK(std::abs(static_cast<double>(hist[n]) - e) <= 4.0 * sigma + 1.0);
  }
}

TEST_CASE("oracle vacuum frequency matches the closed form") {
  const auto d = PhotonDistribution::laguerre_gauss(27.2, 15.0);
  const std::uint64_t draws = 1'000'000;
  oracle::PRepOracle orc(7);
  std::uint64_t zeros = 0;
  for (std::uint64_t i = 0; i < draws; ++i)
    if (orc.draw(27.2, 15.0) == 0) ++zeros;
  const double p = d.vacuum_probability();
  const double sigma = oracle::proportion_sigma(p, static_cast<double>(draws));
  CHECK(std::abs(static_cast<double>(zeros) / draws - p) < 3.0 * sigma);
}

TEST_CASE("sampler chi-square against pmf at the reference parameter sets") {
  RandomStream rs = aqkd::derive_stream(0xaced, 3);
  const std::uint64_t draws = 1'000'000;
  for (const auto& [S, N] : std::vector<std::pair<double, double>>{
           {0.272, 0.15}, {3.33, 0.33}, {27.2, 15.0}}) {
    const auto d = PhotonDistribution::laguerre_gauss(S, N);
    const std::uint64_t cutoff = d.tail_cutoff();
    std::vector<std::uint64_t> hist(cutoff + 1, 0);
    for (std::uint64_t i = 0; i < draws; ++i) {
      const std::uint64_t n = d.sample(rs);
      if (n < hist.size()) ++hist[n];
    }
    const double p =
        oracle::chi_square_p_value(hist, d.pmf_table(cutoff), draws);
    CHECK(p >= 1e-3);
  }
}

TEST_CASE("sampler moments across the family") {
  RandomStream rs = aqkd::derive_stream(0xaced, 4);
  const int draws = 1'000'000;
  SUBCASE("Poisson(0) is identically zero") {
    const auto d = PhotonDistribution::poisson(0.0);
    for (int i = 0; i < 1000; ++i) CHECK(d.sample(rs) == 0);
  }
  SUBCASE("means within 4 sigma of the standard error") {
    for (const auto& d : {PhotonDistribution::poisson(1.5),
                          PhotonDistribution::bose_einstein(15.0),
                          PhotonDistribution::laguerre_gauss(27.2, 15.0),
                          PhotonDistribution::laguerre_gauss(0.272, 0.15)}) {
      double sum = 0.0;
      for (int i = 0; i < draws; ++i) sum += static_cast<double>(d.sample(rs));
      const double se = std::sqrt(d.variance() / draws);
      CHECK(std::abs(sum / draws - d.mean()) < 4.0 * se);
    }
  }
  SUBCASE("variance within 4 sigma for the thermal law") {
    // thermal variance N(1+N), kurtosis of the geometric law drives the se
    const auto d = PhotonDistribution::bose_einstein(15.0);
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double x = static_cast<double>(d.sample(rs));
      sum += x;
      sq += x * x;
    }
    const double mean = sum / draws;
    const double var = sq / draws - mean * mean;
    // se of the sample variance for the geometric law; bounded loosely by
    // sqrt((m4 - var^2)/n) with m4 ~ 9 var^2 + ...
    const double se = std::sqrt(12.0 * d.variance() * d.variance() / draws);
    CHECK(std::abs(var - d.variance()) < 4.0 * se);
  }
}

TEST_CASE("amplified pair sampling") {
  RandomStream rs = aqkd::derive_stream(0xaced, 5);
  SUBCASE("unity gain reduces to the bare source") {
    double sum = 0.0;
    for (int i = 0; i < 1'000'000; ++i) {
      const auto [ns, no] = aqkd::sample_amplified_pair(1.5, 1.0, 1.0, rs);
      CHECK(no == 0);
      sum += static_cast<double>(ns);
    }
    CHECK(std::abs(sum / 1e6 - 1.5) < 4.0 * std::sqrt(1.5 / 1e6));
  }
  SUBCASE("G=16 means and polarization fidelity") {
    const int draws = 1'000'000;
    double sig = 0.0;
    double orth = 0.0;
    for (int i = 0; i < draws; ++i) {
      const auto [ns, no] = aqkd::sample_amplified_pair(1.7, 16.0, 1.0, rs);
      sig += static_cast<double>(ns);
      orth += static_cast<double>(no);
    }
    const double var_sig = 27.2 * 31.0 + 15.0 * 16.0;
    const double var_orth = 15.0 * 16.0;
    CHECK(std::abs(sig / draws - 42.2) < 4.0 * std::sqrt(var_sig / draws));
    CHECK(std::abs(orth / draws - 15.0) < 4.0 * std::sqrt(var_orth / draws));
    const double fidelity = sig / (sig + orth);
    CHECK(fidelity == doctest::Approx(42.2 / 57.2).epsilon(5e-3));
  }
  SUBCASE("cloning-gain point: n_sp = 1/3, signal mean 11/3") {
    const int draws = 1'000'000;
    double sig = 0.0;
    for (int i = 0; i < draws; ++i) {
      const auto [ns, no] = aqkd::sample_amplified_pair(2.5, 4.0 / 3.0, 1.0, rs);
      sig += static_cast<double>(ns);
    }
    const double var_sig = (10.0 / 3.0) * (1.0 + 2.0 / 3.0) + (1.0 / 3.0) * (4.0 / 3.0);
    CHECK(std::abs(sig / draws - 11.0 / 3.0) < 4.0 * std::sqrt(var_sig / draws));
  }
  SUBCASE("domain violations rejected") {
    CHECK_THROWS_AS(aqkd::sample_amplified_pair(-1.0, 2.0, 1.0, rs),
                    std::invalid_argument);
    CHECK_THROWS_AS(aqkd::sample_amplified_pair(1.0, 0.5, 1.0, rs),
                    std::invalid_argument);
    CHECK_THROWS_AS(aqkd::sample_amplified_pair(1.0, 2.0, 0.9, rs),
                    std::invalid_argument);
  }
}

TEST_CASE("thinning closure") {
  SUBCASE("identity and parameter scaling") {
    const auto d = PhotonDistribution::laguerre_gauss(27.2, 15.0);
    CHECK(d.thinned(1.0) == d);
    const auto t = PhotonDistribution::poisson(1.5).thinned(0.01);
    CHECK(t.law() == aqkd::PhotonLaw::kPoisson);
    CHECK(t.mean() == doctest::Approx(0.015).epsilon(1e-15));
  }
  SUBCASE("thinned oracle histogram matches the thinned pmf") {
    const double eta = 0.01;
    const auto thinned =
        PhotonDistribution::laguerre_gauss(27.2, 15.0).thinned(eta);
    CHECK(thinned.signal_mean() == doctest::Approx(0.272).epsilon(1e-15));
    CHECK(thinned.noise_mean() == doctest::Approx(0.15).epsilon(1e-15));
    const std::uint64_t draws = 1'000'000;
    oracle::PRepOracle orc(99);
    std::vector<std::uint64_t> hist(16, 0);
    for (std::uint64_t i = 0; i < draws; ++i) {
      const std::uint64_t n = orc.thin(orc.draw(27.2, 15.0), eta);
      if (n < hist.size()) ++hist[n];
    }
    const auto probs = thinned.pmf_table(15);
    for (std::size_t n = 0; n < hist.size(); ++n) {
      const double e = probs[n] * static_cast<double>(draws);
      const double sigma = std::sqrt(
          probs[n] * (1.0 - probs[n]) * static_cast<double>(draws));
      CHECK(std::abs(static_cast<double>(hist[n]) - e) <= 4.0 * sigma + 1.0);
    }
  }
}

TEST_CASE("generating function endpoints") {
  for (const auto& d : {PhotonDistribution::poisson(1.5),
                        PhotonDistribution::bose_einstein(15.0),
                        PhotonDistribution::laguerre_gauss(27.2, 15.0)}) {
    CHECK(d.pgf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.pgf(0.0) == doctest::Approx(d.vacuum_probability()).epsilon(1e-14));
    // pgf at z is the vacuum probability of the (1-z)-thinned law
    CHECK(d.pgf(0.7) ==
          doctest::Approx(d.thinned(0.3).vacuum_probability()).epsilon(1e-13));
  }
}

TEST_CASE("mean scales linearly under thinning") {
  // linearity of loss: mean after thinning is exactly eta * mean
  for (double eta : {0.0, 0.17, 0.5, 0.99}) {
    const auto d = PhotonDistribution::laguerre_gauss(3.33, 0.33);
    CHECK(d.thinned(eta).mean() == doctest::Approx(eta * d.mean()).epsilon(1e-12));
  }
}
