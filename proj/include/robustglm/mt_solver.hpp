#pragma once

#include <cstdint>

#include "robustglm/dataset.hpp"
#include "robustglm/irwls.hpp"
#include "robustglm/mloss.hpp"
#include "robustglm/psc_init.hpp"

namespace robustglm {

/// MT estimator by reweighted least squares from `start`:
///   beta += (X' W^2 W* X)^-1 X' W W* (T - s(X beta)),
/// W = diag(s'), W* = diag(psi(u)/u), u = T - s(X beta), psi(0)/0 = psi'(0).
/// Rows with zero robustness weight are excluded from the solve, so
/// responses beyond the rejection point do not affect the iterates.
///
/// Throws DegenerateWeightsError if every weight vanishes.
FitResult mt_fit(const Dataset& data, const MTable& table, const LossSpec& loss,
                 const Eigen::VectorXd& start, const SolverOptions& opts = {});

struct FmtConfig {
  InitConfig init{};
  SolverOptions final{};
};

struct FmtTelemetry {
  Stage1Telemetry stage1;
  Stage2Telemetry stage2;
  Eigen::VectorXd beta_stage1;
  Eigen::VectorXd beta_stage2;
  double seconds_stage1 = 0.0;
  double seconds_stage2 = 0.0;
  double seconds_final = 0.0;
};

struct FmtResult {
  FitResult fit;
  FmtTelemetry telemetry;
};

/// stage1 -> stage2 -> mt_fit started at the stage-2 estimate.
FmtResult fmt(const Dataset& data, const ModelTables& tables, const FmtConfig& cfg = {});

/// Poisson maximum likelihood by IRLS, started from mu = y + 0.1.
/// Throws DivergenceError when the iterates leave the finite range or the
/// linear predictor runs off to -inf/+inf without converging.
FitResult ml_fit(const Dataset& data, const SolverOptions& opts = {});

/// Capped IRLS used for subsample candidates: never throws on
/// nonconvergence, only on non-finite iterates.
FitResult ml_irls(const Dataset& data, const SolverOptions& opts);

inline constexpr int kDefaultSubsamples = 2500;

struct SmtConfig {
  int subsamples = kDefaultSubsamples;
  std::uint64_t seed = 1;
  int subsample_ml_iter = 10;
  int redraws = 10;
  SolverOptions final{};
  int threads = 1;
};

struct SmtResult {
  FitResult fit;
  Eigen::VectorXd start;
  int usable_subsamples = 0;
};

/// Random size-p subsamples, ML on each, best full-sample bounded L starts mt_fit.
/// Subsample i draws from its own stream seeded by (seed, i).
SmtResult smt(const Dataset& data, const ModelTables& tables, const SmtConfig& cfg = {});

/// Smallest N with 1 - (1 - (1 - eps)^p)^N > target_prob.
std::uint64_t required_subsamples(double eps, int p, double target_prob);

}  // namespace robustglm
