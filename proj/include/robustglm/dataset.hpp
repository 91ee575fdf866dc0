#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "robustglm/families.hpp"

namespace robustglm {

using Index = Eigen::Index;
using CountVector = Eigen::Matrix<Count, Eigen::Dynamic, 1>;

/// Design matrix (rows x_i^T) and nonnegative integer responses.
struct Dataset {
  Eigen::MatrixXd X;
  CountVector y;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }

  /// Throws InputError unless n > p, y >= 0 and X is finite.
  void validate() const;

  /// Rows in the given order.
  Dataset subset(std::span<const Index> rows) const;

  /// T = (t(y_1), ..., t(y_n)).
  Eigen::VectorXd transformed() const;
};

/// Indices 0..n-1 except `drop`.
std::vector<Index> all_but(Index n, Index drop);

struct FitResult {
  Eigen::VectorXd beta;
  bool converged = false;
  /// The ridge fallback was needed for at least one solve.
  bool degraded = false;
  int iterations = 0;
  /// L(beta) under the producing estimator's loss.
  double objective = 0.0;
  /// Sup-norm of the estimating equation at beta.
  double eq_residual_norm = 0.0;
  /// Final IRWLS row weights.
  Eigen::VectorXd weights;
};

}  // namespace robustglm
