#pragma once

// Shared pieces of the reweighted least-squares solvers.

#include <Eigen/Dense>

#include "robustglm/dataset.hpp"
#include "robustglm/mloss.hpp"

namespace robustglm {

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 100;
};

struct LeastSquaresStep {
  Eigen::VectorXd delta;
  /// Rank-deficient system solved with the 1e-10 * trace / p ridge.
  bool degraded = false;
};

/// argmin_d ||A d - rhs|| by column-pivoted QR, falling back to a small ridge
/// on the normal equations when A is rank deficient. Throws
/// RankDeficientError when A is identically zero.
LeastSquaresStep solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs);

/// s and s' of the table at every linear predictor.
struct TableValues {
  Eigen::VectorXd s;
  Eigen::VectorXd s_prime;
};
TableValues evaluate(const MTable& table, const Eigen::VectorXd& eta);

/// L(beta) = sum_i rho(t(y_i) - s(x_i^T beta)).
double mt_objective(const Dataset& data, const Eigen::VectorXd& beta, const MTable& table,
                    const LossSpec& loss);

/// ||X' W Psi||_inf with W = diag(s'(X beta)) and Psi_i = psi(t(y_i) - s(x_i' beta)),
/// the MT estimating equation.
double mt_equation_residual(const Dataset& data, const Eigen::VectorXd& beta, const MTable& table,
                            const LossSpec& loss);

/// ||new - old|| / max(||old||, 1e-12).
double relative_change(const Eigen::VectorXd& updated, const Eigen::VectorXd& previous);

}  // namespace robustglm
