#include "robustglm/irwls.hpp"

#include <algorithm>

#include "robustglm/errors.hpp"

namespace robustglm {

LeastSquaresStep solve_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs) {
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() == A.cols()) return {qr.solve(rhs), false};

  const Eigen::MatrixXd gram = A.transpose() * A;
  const double trace = gram.trace();
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw RankDeficientError("weighted design is identically zero");
  }
  Eigen::MatrixXd ridged = gram;
  ridged.diagonal().array() += 1e-10 * trace / static_cast<double>(A.cols());
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(ridged);
  if (ldlt.info() != Eigen::Success) {
    throw RankDeficientError("ridge-regularized normal equations could not be factored");
  }
  return {ldlt.solve(A.transpose() * rhs), true};
}

TableValues evaluate(const MTable& table, const Eigen::VectorXd& eta) {
  TableValues out{Eigen::VectorXd(eta.size()), Eigen::VectorXd(eta.size())};
  for (Index i = 0; i < eta.size(); ++i) table.eval(eta[i], out.s[i], out.s_prime[i]);
  return out;
}

double mt_objective(const Dataset& data, const Eigen::VectorXd& beta, const MTable& table,
                    const LossSpec& loss) {
  const Eigen::VectorXd eta = data.X * beta;
  double sum = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    sum += loss.rho(t_transform(data.y[i]) - table.s(eta[i]));
  }
  return sum;
}

double mt_equation_residual(const Dataset& data, const Eigen::VectorXd& beta, const MTable& table,
                            const LossSpec& loss) {
  const TableValues v = evaluate(table, data.X * beta);
  Eigen::VectorXd weighted_psi(data.n());
  for (Index i = 0; i < data.n(); ++i) {
    weighted_psi[i] = v.s_prime[i] * loss.psi(t_transform(data.y[i]) - v.s[i]);
  }
  return (data.X.transpose() * weighted_psi).lpNorm<Eigen::Infinity>();
}

double relative_change(const Eigen::VectorXd& updated, const Eigen::VectorXd& previous) {
  return (updated - previous).norm() / std::max(previous.norm(), 1e-12);
}

}  // namespace robustglm
