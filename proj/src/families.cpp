#include "robustglm/families.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robustglm/errors.hpp"

namespace robustglm {

namespace {

constexpr double kTailTerm = 1e-15;
// Mean above which the quantile search starts from a normal bracket.
constexpr double kNormalBracketMean = 1e4;

void require_mean(double mu, const char* op) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    std::ostringstream msg;
    msg << op << ": mean must be finite and nonnegative, got " << mu;
    throw DomainError(msg.str());
  }
}

// First index worth summing for a cdf: mass below it is far under 1e-300.
Count cdf_start(double mu) {
  const double lo = std::floor(mu - 40.0 * std::sqrt(mu) - 40.0);
  return lo > 0.0 ? static_cast<Count>(lo) : 0;
}

double standard_normal_quantile(double q) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

namespace {

// log k! - [(k + 1/2) log k - k + log sqrt(2 pi)], exact for small k and by
// its asymptotic series beyond.
double stirling_error(double k) {
  constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;
  if (k <= 15.0) return std::lgamma(k + 1.0) - (k + 0.5) * std::log(k) + k - kLogSqrt2Pi;
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double k2 = k * k;
  if (k > 500.0) return (s0 - s1 / k2) / k;
  if (k > 80.0) return (s0 - (s1 - s2 / k2) / k2) / k;
  if (k > 35.0) return (s0 - (s1 - (s2 - s3 / k2) / k2) / k2) / k;
  return (s0 - (s1 - (s2 - (s3 - s4 / k2) / k2) / k2) / k2) / k;
}

// k log(k / mu) + mu - k without cancellation when k is close to mu.
double deviance_term(double k, double mu) {
  if (std::abs(k - mu) < 0.1 * (k + mu)) {
    const double v = (k - mu) / (k + mu);
    double sum = (k - mu) * v;
    double ej = 2.0 * k * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double next = sum + ej / (2 * j + 1);
      if (next == sum) return next;
      sum = next;
    }
    return sum;
  }
  return k * std::log(k / mu) + mu - k;
}

}  // namespace

// Saddle-point form: keeps full relative accuracy for large k and mu, where
// k log mu - lgamma(k + 1) would lose digits to cancellation.
double pois_log_pmf(Count k, double mu) {
  require_mean(mu, "pois_log_pmf");
  if (k < 0) throw DomainError("pois_log_pmf: k must be nonnegative");
  if (mu == 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (k == 0) return -mu;
  constexpr double kLog2Pi = 1.83787706640934548356065947281;
  const double kd = static_cast<double>(k);
  return -stirling_error(kd) - deviance_term(kd, mu) - 0.5 * (kLog2Pi + std::log(kd));
}

double pois_pmf(Count k, double mu) { return std::exp(pois_log_pmf(k, mu)); }

double pois_cdf(Count k, double mu) {
  require_mean(mu, "pois_cdf");
  if (k < 0) return 0.0;
  double sum = 0.0;
  for (Count j = cdf_start(mu); j <= k; ++j) {
    const double term = pois_pmf(j, mu);
    sum += term;
    if (j > mu && term < 1e-300) break;
  }
  return std::min(sum, 1.0);
}

Count pois_quantile(double q, double mu) {
  require_mean(mu, "pois_quantile");
  if (!(q > 0.0 && q < 1.0)) {
    std::ostringstream msg;
    msg << "pois_quantile: probability must lie in (0, 1), got " << q;
    throw DomainError(msg.str());
  }
  if (mu == 0.0) return 0;

  const double sd = std::sqrt(mu);
  const Count guard = static_cast<Count>(std::ceil(mu + 40.0 * sd + 100.0));

  if (mu <= kNormalBracketMean) {
    double cum = 0.0;
    for (Count k = cdf_start(mu);; ++k) {
      cum += pois_pmf(k, mu);
      if (cum >= q || k >= guard) return k;
    }
  }

  // Continuity-corrected normal guess, then exact walk in either direction.
  const double z = standard_normal_quantile(q);
  Count k = std::max<Count>(0, static_cast<Count>(std::floor(mu + z * sd - 0.5)));
  double cum = pois_cdf(k, mu);
  if (cum >= q) {
    while (k > 0) {
      const double below = cum - pois_pmf(k, mu);
      if (below < q) break;
      cum = below;
      --k;
    }
    return k;
  }
  while (cum < q && k < guard) {
    ++k;
    cum += pois_pmf(k, mu);
  }
  return k;
}

double t_transform(Count y) {
  if (y < 0) throw DomainError("t_transform: response must be nonnegative");
  return 2.0 * std::sqrt(static_cast<double>(y));
}

SupportRange pois_support(double mu) {
  require_mean(mu, "pois_support");
  if (mu == 0.0) return {0, 0};
  const double spread = 10.0 * std::sqrt(mu) + 20.0;

  Count hi = static_cast<Count>(std::ceil(mu + spread));
  while (pois_pmf(hi, mu) >= kTailTerm) ++hi;

  Count lo = 0;
  const double lo_guess = std::floor(mu - spread);
  if (lo_guess > 0.0) {
    lo = static_cast<Count>(lo_guess);
    while (lo > 0 && pois_pmf(lo, mu) >= kTailTerm) --lo;
  }
  return {lo, hi};
}

double expected_t(double mu) {
  require_mean(mu, "expected_t");
  if (mu == 0.0) return 0.0;
  if (mu > kExpectedTCeiling) {
    const double root = std::sqrt(mu);
    return 2.0 * root - 0.25 / root;
  }
  const SupportRange range = pois_support(mu);
  double sum = 0.0;
  for (Count k = range.lo; k <= range.hi; ++k) {
    sum += t_transform(k) * pois_pmf(k, mu);
  }
  return sum;
}

}  // namespace robustglm
