#include <doctest.h>

#include "robustglm/errors.hpp"
#include "robustglm/families.hpp"
#include "support.hpp"

using namespace robustglm;

TEST_CASE("pmf at documented points") {
  CHECK(pois_pmf(0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(pois_pmf(0, 0.0) == 1.0);
  CHECK(pois_pmf(3, 0.0) == 0.0);
  CHECK(pois_pmf(2, 2.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
}

TEST_CASE("pmf rejects negative arguments") {
  CHECK_THROWS_AS(pois_pmf(-1, 1.0), DomainError);
  CHECK_THROWS_AS(pois_pmf(0, -0.5), DomainError);
  CHECK_THROWS_AS(pois_cdf(1, -1.0), DomainError);
}

TEST_CASE("pmf agrees with long-double log-space evaluation") {
  for (double mu : {0.003, 0.5, 3.0, 40.0, 150.0, 2500.0}) {
    for (Count k = 0; k <= 400; k += 7) {
      const double oracle = support::naive_pmf(k, mu);
      if (oracle < 1e-300) continue;
      CHECK(pois_pmf(k, mu) == doctest::Approx(oracle).epsilon(1e-11));
    }
  }
}

TEST_CASE("pmf mass over mu + 10 sqrt(mu) + 50 is one") {
  for (double mu : {1e-3, 0.2, 1.0, 7.5, 60.0, 900.0, 20000.0}) {
    const auto top = static_cast<Count>(mu + 10.0 * std::sqrt(mu) + 50.0);
    long double sum = 0.0L;
    for (Count k = 0; k <= top; ++k) sum += pois_pmf(k, mu);
    CHECK(std::abs(static_cast<double>(sum) - 1.0) <= 1e-12);
  }
}

TEST_CASE("cdf is nondecreasing and matches summed pmf") {
  const double mu = 12.3;
  double prev = 0.0;
  long double running = 0.0L;
  for (Count k = 0; k < 60; ++k) {
    running += support::naive_pmf(k, mu);
    const double c = pois_cdf(k, mu);
    CHECK(c >= prev);
    CHECK(c == doctest::Approx(static_cast<double>(running)).epsilon(1e-12));
    prev = c;
  }
}

TEST_CASE("quantile examples") {
  CHECK(pois_quantile(0.5, 0.0) == 0);
  CHECK(pois_quantile(0.975, 1.0) == 3);
  CHECK(pois_quantile(0.025, 4.0) == 1);
  CHECK_THROWS_AS(pois_quantile(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(pois_quantile(1.0, 1.0), DomainError);
}

TEST_CASE("quantile matches cumulative summation") {
  for (double mu : {0.01, 0.7, 2.0, 9.0, 33.0, 150.0}) {
    for (double q : {0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999}) {
      CHECK(pois_quantile(q, mu) == support::cumsum_quantile(q, mu));
    }
  }
}

TEST_CASE("quantile inverts the cdf for small and large means") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uq(1e-6, 1.0 - 1e-6);
  for (double mu : {0.2, 5.0, 300.0, 9000.0, 2.0e4, 3.3e5, 1.0e7}) {
    for (int r = 0; r < 20; ++r) {
      const double q = uq(rng);
      const Count k = pois_quantile(q, mu);
      CHECK(pois_cdf(k, mu) >= q);
      if (k > 0) CHECK(pois_cdf(k - 1, mu) < q);
    }
  }
}

TEST_CASE("variance-stabilizing transform") {
  CHECK(t_transform(0) == 0.0);
  CHECK(t_transform(4) == 4.0);
  CHECK(t_transform(9) == 6.0);
  CHECK_THROWS_AS(t_transform(-1), DomainError);
}

TEST_CASE("expected transform agrees with truncated summation") {
  CHECK(expected_t(0.0) == 0.0);
  CHECK(expected_t(1.0) == doctest::Approx(1.546385312758572).epsilon(1e-12));
  CHECK(expected_t(100.0) == doctest::Approx(19.97488912538229).epsilon(1e-12));
  for (double mu : {1e-3, 0.05, 1.0, 4.0, 25.0, 100.0, 1234.5}) {
    CHECK(expected_t(mu) == doctest::Approx(support::truncated_expected_t(mu)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(expected_t(-1.0), DomainError);
}

TEST_CASE("expected transform is continuous at the asymptotic ceiling") {
  const double below = expected_t(std::nextafter(kExpectedTCeiling, 0.0));
  const double above = expected_t(kExpectedTCeiling * (1.0 + 1e-12));
  CHECK(std::abs(below - above) <= 1e-8);
}

TEST_CASE("expected transform increases along a fine grid") {
  double prev = expected_t(1e-3);
  for (double mu = 2e-3; mu < 50.0; mu += 1e-3) {
    const double v = expected_t(mu);
    REQUIRE(v > prev);
    prev = v;
  }
  for (double mu = 50.0; mu < 2e5; mu *= 1.01) {
    const double v = expected_t(mu);
    REQUIRE(v > prev);
    prev = v;
  }
}

TEST_CASE("support range covers the mass") {
  for (double mu : {0.0, 0.3, 10.0, 1e4}) {
    const SupportRange r = pois_support(mu);
    CHECK(r.lo >= 0);
    if (mu > 0.0) CHECK(static_cast<double>(r.hi) >= mu + 10.0 * std::sqrt(mu) + 20.0 - 1.0);
    long double mass = 0.0L;
    for (Count k = r.lo; k <= r.hi; ++k) mass += pois_pmf(k, mu);
    CHECK(std::abs(static_cast<double>(mass) - 1.0) <= 1e-12);
  }
}

TEST_CASE("model bundle forwards to the free functions") {
  PoissonLogModel m;
  CHECK(m.inverse_link(m.link(3.5)) == doctest::Approx(3.5));
  CHECK(m.pmf(2, 2.0) == pois_pmf(2, 2.0));
  CHECK(m.quantile(0.975, 1.0) == 3);
  CHECK(m.expected_transform(1.0) == expected_t(1.0));
}
