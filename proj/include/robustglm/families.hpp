#pragma once

// Poisson distribution with log link: probabilities, quantiles and the
// variance-stabilizing transform t(y) = 2 sqrt(y) used by every estimator.

#include <cmath>
#include <cstdint>

namespace robustglm {

using Count = std::int64_t;

/// Mean above which expected_t switches to its asymptotic expansion.
inline constexpr double kExpectedTCeiling = 1e5;

double pois_log_pmf(Count k, double mu);
double pois_pmf(Count k, double mu);
double pois_cdf(Count k, double mu);

/// Smallest k with cdf(k, mu) >= q, for 0 < q < 1.
Count pois_quantile(double q, double mu);

/// 2 sqrt(y).
double t_transform(Count y);

/// E_mu t(y), by truncated summation below kExpectedTCeiling and
/// 2 sqrt(mu) - 1 / (4 sqrt(mu)) above it.
double expected_t(double mu);

/// Index range [lo, hi] outside of which every pmf term is below 1e-15 and
/// which extends at least 10 sqrt(mu) + 20 beyond mu on either side.
struct SupportRange {
  Count lo = 0;
  Count hi = 0;
};
SupportRange pois_support(double mu);

/// The family/link bundle. Stateless; phi is fixed at 1.
struct PoissonLogModel {
  static double link(double mu) { return std::log(mu); }
  static double inverse_link(double eta) { return std::exp(eta); }

  static double pmf(Count k, double mu) { return pois_pmf(k, mu); }
  static double cdf(Count k, double mu) { return pois_cdf(k, mu); }
  static Count quantile(double q, double mu) { return pois_quantile(q, mu); }
  static double transform(Count y) { return t_transform(y); }
  static double expected_transform(double mu) { return expected_t(mu); }
};

}  // namespace robustglm
