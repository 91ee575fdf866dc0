#pragma once

// Transformed least squares (LST): the MT estimator with rho(u) = u^2, whose
// centering function is m(mu) = E_mu t(y).

#include <optional>

#include "robustglm/dataset.hpp"
#include "robustglm/irwls.hpp"
#include "robustglm/mloss.hpp"

namespace robustglm {

/// Iterates beta += (X' W^2 X)^-1 X' W (T - s(X beta)) with W = diag(s'(X beta))
/// until the relative change drops below `opts.tol`. Without a start, the first
/// step is taken from the linear predictor eta_0 = log(y + 0.1).
///
/// `table` must be the square-loss table. The objective reported is
/// sum (t(y_i) - s(x_i' beta))^2 and eq_residual_norm is ||X' W (T - s)||_inf.
FitResult lst_fit(const Dataset& data, const MTable& table,
                  const std::optional<Eigen::VectorXd>& start = std::nullopt,
                  const SolverOptions& opts = {});

/// Exactly one LST update on `data`, starting from `anchor`.
Eigen::VectorXd lst_onestep(const Dataset& data, const Eigen::VectorXd& anchor,
                            const MTable& table);

/// Column j holds lst_onestep on the sample without observation j, from the
/// common anchor. Uses rank-one downdates of the anchor's normal equations;
/// columns whose downdated system is not positive definite fall back to the
/// QR path of lst_onestep.
Eigen::MatrixXd lst_onestep_leave_one_out(const Dataset& data, const Eigen::VectorXd& anchor,
                                          const MTable& table, int threads = 1);

}  // namespace robustglm
