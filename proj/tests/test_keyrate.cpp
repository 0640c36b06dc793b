#include <doctest.h>

#include <cmath>

#include "aqkd/keyrate.hpp"

using namespace aqkd;

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.11) == doctest::Approx(0.4999160).epsilon(2e-6));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);
  SUBCASE("symmetry h2(p) = h2(1-p)") {
    for (double p = 0.01; p < 0.5; p += 0.013)
      CHECK(std::abs(binary_entropy(p) - binary_entropy(1.0 - p)) < 1e-12);
  }
}

TEST_CASE("eve information") {
  CHECK(eve_information(1.0, 0.3) == 0.0);
  CHECK(eve_information(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eve_information(0.75, 0.1) == doctest::Approx(0.1327511).epsilon(1e-5));
  SUBCASE("an unambiguous coin flip carries nothing") {
    for (double d = 0.0; d <= 1.0; d += 0.1)
      CHECK(std::abs(eve_information(d, 0.5)) < 1e-12);
  }
}

TEST_CASE("secret fraction") {
  CHECK(secret_fraction(0.0, 1.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(secret_fraction(0.11, 0.0, 0.0, 1.0) == 0.0);  // clamped below zero
  CHECK(secret_fraction(0.05, 0.75, 0.1, 1.16) ==
        doctest::Approx(0.535029).epsilon(2e-5));
  CHECK_THROWS_AS(secret_fraction(0.1, 0.0, 0.0, 0.9), std::invalid_argument);
  SUBCASE("monotone nonincreasing in BER, Eve accuracy, and f_ec") {
    double prev = 2.0;
    for (double e = 0.0; e <= 0.5; e += 0.05) {
      const double r = secret_fraction(e, 0.5, 0.2, 1.16);
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
    // lower unambiguous BER means a better-informed Eve and a smaller r
    prev = 2.0;
    for (double ee = 0.5; ee >= 0.0; ee -= 0.05) {
      const double r = secret_fraction(0.02, 0.5, ee, 1.16);
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
    prev = 2.0;
    for (double f = 1.0; f <= 2.0; f += 0.1) {
      const double r = secret_fraction(0.05, 0.5, 0.2, f);
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
  }
}

TEST_CASE("secret yield") {
  CHECK(secret_yield(0, 1000, 0.0, 0.0, 0.0, 1.16) == 0.0);
  CHECK_THROWS_AS(secret_yield(10, 0, 0.0, 0.0, 0.0, 1.16),
                  std::invalid_argument);
  // pipeline consistency: yield is exactly (|D|/pulses) * r
  const double r = secret_fraction(0.01, 0.4, 0.05, 1.16);
  CHECK(secret_yield(2500, 1'000'000, 0.01, 0.4, 0.05, 1.16) ==
        doctest::Approx(2500.0 / 1e6 * r).epsilon(1e-14));
}

TEST_CASE("capacity bound") {
  CHECK(takeoka_bound(0.0) == 0.0);
  CHECK(takeoka_bound(0.5) == doctest::Approx(std::log2(3.0)).epsilon(1e-14));
  // independent route: log2((1+x)/(1-x)) = 2 atanh(x) / ln 2
  CHECK(takeoka_bound(0.01) ==
        doctest::Approx(2.0 * std::atanh(0.01) / std::log(2.0)).epsilon(1e-12));
  CHECK(takeoka_bound(0.01) == doctest::Approx(0.0288549).epsilon(1e-5));
  CHECK_THROWS_AS(takeoka_bound(1.0), std::invalid_argument);
  CHECK_THROWS_AS(takeoka_bound(-0.1), std::invalid_argument);
  SUBCASE("small-transmittance limit 2 eta / ln 2") {
    const double eta = 1e-3;
    CHECK(takeoka_bound(eta) ==
          doctest::Approx(2.0 * eta / std::log(2.0)).epsilon(1e-4));
  }
}
