#include "robustglm/lst_solver.hpp"

#include <cmath>
#include <sstream>

#include "robustglm/errors.hpp"
#include "robustglm/parallel.hpp"

namespace robustglm {

namespace {

struct Linearization {
  Eigen::MatrixXd design;    // W X
  Eigen::VectorXd residual;  // T - s(X beta)
  Eigen::VectorXd w;         // s'(X beta)
};

Linearization linearize(const Dataset& data, const Eigen::VectorXd& T,
                        const Eigen::VectorXd& eta, const MTable& table) {
  TableValues v = evaluate(table, eta);
  return {v.s_prime.asDiagonal() * data.X, T - v.s, std::move(v.s_prime)};
}

void require_finite(const Eigen::VectorXd& beta, int iteration) {
  if (!beta.allFinite()) {
    std::ostringstream msg;
    msg << "LST iterate became non-finite at iteration " << iteration;
    throw DivergenceError(msg.str());
  }
}

}  // namespace

FitResult lst_fit(const Dataset& data, const MTable& table,
                  const std::optional<Eigen::VectorXd>& start, const SolverOptions& opts) {
  const Eigen::VectorXd T = data.transformed();
  FitResult fit;
  int iteration = 0;

  if (start) {
    if (start->size() != data.p()) throw DomainError("lst_fit: start has wrong length");
    fit.beta = *start;
  } else {
    Eigen::VectorXd eta0(data.n());
    for (Index i = 0; i < data.n(); ++i) eta0[i] = std::log(static_cast<double>(data.y[i]) + 0.1);
    const Linearization lin = linearize(data, T, eta0, table);
    const Eigen::VectorXd rhs = lin.w.cwiseProduct(eta0) + lin.residual;
    const LeastSquaresStep step = solve_least_squares(lin.design, rhs);
    fit.beta = step.delta;
    fit.degraded |= step.degraded;
    require_finite(fit.beta, ++iteration);
  }

  while (iteration < opts.max_iter) {
    const Linearization lin = linearize(data, T, data.X * fit.beta, table);
    const LeastSquaresStep step = solve_least_squares(lin.design, lin.residual);
    fit.degraded |= step.degraded;
    const Eigen::VectorXd next = fit.beta + step.delta;
    require_finite(next, ++iteration);
    const double change = relative_change(next, fit.beta);
    fit.beta = next;
    if (change <= opts.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.iterations = iteration;

  const Linearization lin = linearize(data, T, data.X * fit.beta, table);
  fit.objective = lin.residual.squaredNorm();
  fit.eq_residual_norm = (lin.design.transpose() * lin.residual).lpNorm<Eigen::Infinity>();
  fit.weights = lin.w.array().square();
  return fit;
}

Eigen::VectorXd lst_onestep(const Dataset& data, const Eigen::VectorXd& anchor,
                            const MTable& table) {
  const Linearization lin = linearize(data, data.transformed(), data.X * anchor, table);
  const LeastSquaresStep step = solve_least_squares(lin.design, lin.residual);
  Eigen::VectorXd out = anchor + step.delta;
  require_finite(out, 1);
  return out;
}

Eigen::MatrixXd lst_onestep_leave_one_out(const Dataset& data, const Eigen::VectorXd& anchor,
                                          const MTable& table, int threads) {
  const Linearization lin = linearize(data, data.transformed(), data.X * anchor, table);
  const Eigen::MatrixXd gram = lin.design.transpose() * lin.design;
  const Eigen::VectorXd score = lin.design.transpose() * lin.residual;

  Eigen::MatrixXd out(data.p(), data.n());
  parallel_for(static_cast<std::size_t>(data.n()), threads, [&](std::size_t col) {
    const auto j = static_cast<Index>(col);
    const Eigen::VectorXd u = lin.design.row(j).transpose();
    Eigen::MatrixXd gram_j = gram;
    gram_j.noalias() -= u * u.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(gram_j);
    // A tiny Cholesky pivot means observation j carried nearly all the
    // information in some direction; the QR path handles that case.
    if (llt.info() == Eigen::Success) {
      const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
      if (diag.minCoeff() > 1e-7 * diag.maxCoeff()) {
        out.col(j) = anchor + llt.solve(score - u * lin.residual[j]);
        return;
      }
    }
    const auto rows = all_but(data.n(), j);
    out.col(j) = lst_onestep(data.subset(rows), anchor, table);
  });
  return out;
}

}  // namespace robustglm
