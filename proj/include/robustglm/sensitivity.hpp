#pragma once

#include <Eigen/Dense>

#include "robustglm/dataset.hpp"
#include "robustglm/mloss.hpp"

namespace robustglm {

/// Sensitivity matrix R and its principal sensitivity components.
///
/// Row i of R is the sensitivity vector r_i: entry (i, j) is the change in
/// the fitted transformed value of observation i when observation j is
/// deleted. The directions v_k live in R^n (column-index space of R) and
/// are the leading right singular vectors of R; z_k = R v_k.
struct SensitivityDecomposition {
  Eigen::MatrixXd R;
  Eigen::MatrixXd directions;  // n x count, orthonormal columns
  Eigen::MatrixXd components;  // n x count, column k = R * directions.col(k)
  Eigen::VectorXd eigenvalues;  // of R^T R, nonincreasing
  Eigen::VectorXd residuals;    // e_i = t(y_i) - s(x_i' beta); empty if unknown
};

/// r_ij = s(x_i' beta) - s(x_i' beta_(j)) with beta_(j) the one-step
/// leave-one-out LST fit from `beta`. The linear predictors x_i' beta_(j) are
/// clamped to [-300, 300] so that near-singular deletions stay finite.
Eigen::MatrixXd sensitivity_matrix(const Dataset& data, const Eigen::VectorXd& beta,
                                   const MTable& table, int threads = 1);

/// Leading `count` right singular vectors of R with the sign convention that
/// each vector's largest-magnitude entry is positive.
SensitivityDecomposition principal_components(const Eigen::MatrixXd& R, Index count);

/// sensitivity_matrix + principal_components with count = p, plus residuals.
SensitivityDecomposition principal_sensitivity(const Dataset& data, const Eigen::VectorXd& beta,
                                               const MTable& table, int threads = 1);

}  // namespace robustglm
