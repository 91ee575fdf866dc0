#pragma once

// Shared fixtures and independent reference computations for the tests.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "robustglm/dataset.hpp"
#include "robustglm/families.hpp"
#include "robustglm/mloss.hpp"

namespace support {

using robustglm::Count;
using robustglm::Dataset;
using robustglm::Index;

inline const robustglm::ModelTables& bisquare_tables() {
  static const auto tables = robustglm::ModelTables::get(robustglm::LossSpec::bisquare(), {}, 4);
  return tables;
}

inline const robustglm::ModelTables& square_tables() {
  static const auto tables = robustglm::ModelTables::get(robustglm::LossSpec::square(), {}, 4);
  return tables;
}

/// Intercept plus standard normal covariates, y ~ Poisson(exp(x' beta)).
inline Dataset poisson_data(std::uint64_t seed, Index n, const Eigen::VectorXd& beta) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 17);
  std::normal_distribution<double> normal;
  Dataset d;
  d.X.resize(n, beta.size());
  d.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    d.X(i, 0) = 1.0;
    for (Index j = 1; j < beta.size(); ++j) d.X(i, j) = normal(rng);
    std::poisson_distribution<Count> draw(std::exp(d.X.row(i).dot(beta)));
    d.y[i] = draw(rng);
  }
  return d;
}

inline Eigen::VectorXd e2(Index p) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  b[1] = 1.0;
  return b;
}

/// Replaces the first `count` rows by (x0, y0).
inline Dataset plant(Dataset d, Index count, const Eigen::VectorXd& x0, Count y0) {
  for (Index i = 0; i < count; ++i) {
    d.X.row(i) = x0.transpose();
    d.y[i] = y0;
  }
  return d;
}

// ---- oracles -------------------------------------------------------------

/// exp(k log mu - mu - log k!) in long double.
inline double naive_pmf(Count k, double mu) {
  if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
  const long double lk = static_cast<long double>(k);
  return static_cast<double>(
      std::exp(lk * std::log(static_cast<long double>(mu)) - mu - std::lgamma(lk + 1.0L)));
}

/// Smallest k with running sum of naive_pmf >= q.
inline Count cumsum_quantile(double q, double mu) {
  long double sum = 0.0L;
  for (Count k = 0;; ++k) {
    sum += naive_pmf(k, mu);
    if (sum >= q) return k;
  }
}

/// sum_k 2 sqrt(k) pmf(k, mu) over k <= mu + 20 sqrt(mu) + 60.
inline double truncated_expected_t(double mu) {
  long double sum = 0.0L;
  const auto top = static_cast<Count>(mu + 20.0 * std::sqrt(mu) + 60.0);
  for (Count k = 1; k <= top; ++k) sum += 2.0L * std::sqrt(static_cast<long double>(k)) * naive_pmf(k, mu);
  return static_cast<double>(sum);
}

/// Argmin over gamma in {0, step, 2 step, ...} of E_mu rho_c(t(y) - gamma)
/// for the bisquare; the first minimizer wins ties.
inline double dense_grid_m(double mu, double c, double step = 1e-4) {
  const auto top = static_cast<Count>(mu + 20.0 * std::sqrt(mu) + 60.0);
  std::vector<double> t(static_cast<std::size_t>(top + 1)), w(t.size());
  for (Count k = 0; k <= top; ++k) {
    t[static_cast<std::size_t>(k)] = 2.0 * std::sqrt(static_cast<double>(k));
    w[static_cast<std::size_t>(k)] = naive_pmf(k, mu);
  }
  // E rho = 1 - sum over |t_k - gamma| < c of (1 - rho) pmf, so only a window
  // of k contributes for each gamma.
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  const double gmax = t.back();
  const auto steps = static_cast<Count>(gmax / step);
  for (Count g = 0; g <= steps; ++g) {
    const double gamma = static_cast<double>(g) * step;
    const double lo = std::max(0.0, gamma - c);
    const auto k0 = static_cast<Count>(std::floor(lo * lo / 4.0));
    const auto k1 = std::min<Count>(top, static_cast<Count>(std::ceil((gamma + c) * (gamma + c) / 4.0)));
    double gain = 0.0;
    for (Count k = k0; k <= k1; ++k) {
      const double u = (t[static_cast<std::size_t>(k)] - gamma) / c;
      if (std::abs(u) >= 1.0) continue;
      const double a = 1.0 - u * u;
      gain += a * a * a * w[static_cast<std::size_t>(k)];
    }
    const double value = 1.0 - gain;
    if (value < best) {
      best = value;
      arg = gamma;
    }
  }
  return arg;
}

/// One LST update from `anchor`, assembled entry by entry.
inline Eigen::VectorXd naive_lst_step(const Dataset& d, const Eigen::VectorXd& anchor,
                                      const robustglm::MTable& table) {
  const Index p = d.p();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (Index i = 0; i < d.n(); ++i) {
    double eta = 0.0;
    for (Index j = 0; j < p; ++j) eta += d.X(i, j) * anchor[j];
    const double w = table.s_prime(eta);
    const double r = 2.0 * std::sqrt(static_cast<double>(d.y[i])) - table.s(eta);
    for (Index a = 0; a < p; ++a) {
      b[a] += d.X(i, a) * w * r;
      for (Index c = 0; c < p; ++c) A(a, c) += d.X(i, a) * w * w * d.X(i, c);
    }
  }
  return anchor + A.fullPivLu().solve(b);
}

/// Left-to-right long double mean; NaN when empty.
inline double naive_mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  long double sum = 0.0L;
  for (double x : v) sum += x;
  return static_cast<double>(sum / static_cast<long double>(v.size()));
}

inline bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a.data()[i], &b.data()[i], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace support
