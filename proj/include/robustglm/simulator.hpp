#pragma once

// Monte Carlo harness: Poisson regression data with Gaussian covariates,
// identical point contamination at (x0, y0), and MSE over a y0 grid.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "robustglm/dataset.hpp"
#include "robustglm/estimators.hpp"

namespace robustglm {

/// Where the outliers sit: text is x0 = e1 + 3 e2 (high leverage adds 4 e3),
/// caption is x0 = 3 e1 + e2 (high leverage adds 4 e4).
enum class X0Variant { text, caption };
X0Variant parse_x0_variant(const std::string& name);

struct SimScenario {
  int model = 1;  // 1..3 differ in beta0; 4 is model 1 with a high-leverage x0
  Index n = 200;
  Index p = 10;
  double eps = 0.10;
  int reps = 100;
  std::uint64_t seed = 1;
  X0Variant x0_variant = X0Variant::text;
  Eigen::VectorXd beta0;
  Eigen::VectorXd x0;
  std::vector<Count> y0_grid;

  double mu0() const { return std::exp(beta0.dot(x0)); }
  void validate() const;
};

/// Fills beta0, x0 and the default grid 0..3 mu0 in steps of max(1, floor(mu0/10)).
SimScenario make_scenario(int model, Index n, Index p, double eps, int reps, std::uint64_t seed,
                          X0Variant variant = X0Variant::text);

Eigen::VectorXd model_beta0(int model, Index p);
Eigen::VectorXd model_x0(int model, Index p, X0Variant variant);

/// x = (1, x*) with x* ~ N(0, I), y | x ~ Poisson(exp(beta0' x)); a pure
/// function of (scenario.seed, rep).
Dataset generate_dataset(const SimScenario& scenario, int rep);

/// Replaces the first floor(eps * n) rows by (x0, y0).
Dataset contaminate(Dataset data, double eps, const Eigen::VectorXd& x0, Count y0);

struct SimCell {
  EstimatorKind estimator = EstimatorKind::fmt;
  std::optional<Count> y0;  // empty for the clean cell
  /// Squared L2 errors of the successful replications, in rep order.
  std::vector<double> sq_errors;
  double mse = 0.0;
  int n_ok = 0;
  int n_fail = 0;
  double mean_time_s = 0.0;
  double median_time_s = 0.0;
  double p90_time_s = 0.0;
};

struct SimResult {
  SimScenario scenario;
  std::vector<SimCell> cells;  // estimator-major, y0 ascending
  std::string version;

  /// Largest MSE over the grid for one estimator.
  double max_mse(EstimatorKind estimator) const;
  const SimCell& cell(EstimatorKind estimator, std::optional<Count> y0) const;
};

/// Arithmetic mean of squared errors; NaN when empty.
double mse_of(const std::vector<double>& sq_errors);

struct SimOptions {
  EstimatorOptions estimator;
  int threads = 1;
};

/// N replications per (estimator, y0); with eps = 0 the grid collapses to a
/// single clean cell per estimator. Failed replications are counted in n_fail
/// and excluded from the MSE. The smt stream of replication r at y0 is
/// derived from (seed, y0, r).
SimResult run_mse_grid(const SimScenario& scenario, const std::vector<EstimatorKind>& estimators,
                       const SimOptions& opts);

/// CSV with header model,n,p,estimator,eps,y0,mse,n_ok,n_fail,mean_time_s,seed.
void write_csv(const SimResult& result, std::ostream& out);

}  // namespace robustglm
