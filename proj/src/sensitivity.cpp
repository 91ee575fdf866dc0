#include "robustglm/sensitivity.hpp"

#include <optional>
#include <random>
#include <sstream>

#include "robustglm/errors.hpp"
#include "robustglm/irwls.hpp"
#include "robustglm/lst_solver.hpp"

namespace robustglm {

namespace {
constexpr double kEtaClamp = 300.0;
}  // namespace

Eigen::MatrixXd sensitivity_matrix(const Dataset& data, const Eigen::VectorXd& beta,
                                   const MTable& table, int threads) {
  const Eigen::MatrixXd loo = lst_onestep_leave_one_out(data, beta, table, threads);
  // (i, j): x_i' beta_(j). A deletion that leaves the weighted normal
  // equations nearly singular can throw the one-step fit arbitrarily far;
  // clamping keeps s finite while still ranking it as the largest change.
  const Eigen::MatrixXd eta_loo = (data.X * loo).cwiseMax(-kEtaClamp).cwiseMin(kEtaClamp);
  const Eigen::VectorXd eta = data.X * beta;

  Eigen::MatrixXd R(data.n(), data.n());
  for (Index j = 0; j < data.n(); ++j) {
    for (Index i = 0; i < data.n(); ++i) {
      R(i, j) = table.s(eta[i]) - table.s(eta_loo(i, j));
    }
  }
  if (!R.allFinite()) {
    for (Index j = 0; j < data.n(); ++j) {
      if (!R.col(j).allFinite()) {
        throw NumericalError("sensitivity column " + std::to_string(j) + " is not finite");
      }
    }
  }
  return R;
}

namespace {

struct Spectrum {
  Eigen::MatrixXd V;
  Eigen::VectorXd sigma;
};

Spectrum full_svd(const Eigen::MatrixXd& R) {
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success || !svd.matrixV().allFinite()) {
    std::ostringstream msg;
    const auto& sv = svd.singularValues();
    msg << "singular value decomposition failed (largest/smallest singular value "
        << sv.maxCoeff() << "/" << sv.minCoeff() << ")";
    throw NumericalError(msg.str());
  }
  return {svd.matrixV(), svd.singularValues()};
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& Y) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

// Leading `count` right singular pairs by block subspace iteration with a
// fixed pseudo-random start and Rayleigh-Ritz extraction. Returns nothing
// unless every wanted pair satisfies |R'R v - sigma^2 v| <= 1e-12 sigma_1^2.
std::optional<Spectrum> truncated_svd(const Eigen::MatrixXd& R, Index count) {
  constexpr Index kOversample = 10;
  constexpr int kMaxSweeps = 40;
  constexpr double kTol = 1e-12;
  const Index n = R.cols();
  const Index k = std::min(n, count + kOversample);

  std::mt19937_64 rng(0x5eed);
  Eigen::MatrixXd omega(R.rows(), k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < R.rows(); ++i) {
      omega(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    }
  }
  Eigen::MatrixXd Q = orthonormal_basis(R.transpose() * omega);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const Eigen::MatrixXd B = R * Q;
    const Eigen::JacobiSVD<Eigen::MatrixXd> small(B, Eigen::ComputeThinV);
    const Eigen::MatrixXd V = Q * small.matrixV().leftCols(count);
    const Eigen::VectorXd sigma = small.singularValues().head(count);
    if (!V.allFinite()) return std::nullopt;

    const double top = sigma[0] * sigma[0];
    if (top == 0.0) return std::nullopt;
    const Eigen::MatrixXd RtRV = R.transpose() * (R * V);
    bool done = true;
    for (Index c = 0; c < count && done; ++c) {
      const double res = (RtRV.col(c) - sigma[c] * sigma[c] * V.col(c)).norm();
      done = res <= kTol * top;
    }
    if (done) return Spectrum{V, sigma};
    Q = orthonormal_basis(R.transpose() * B);
  }
  return std::nullopt;
}

}  // namespace

SensitivityDecomposition principal_components(const Eigen::MatrixXd& R, Index count) {
  if (!R.allFinite()) throw NumericalError("sensitivity matrix has non-finite entries");
  const Index k = std::min<Index>(count, R.cols());

  // Large sensitivity matrices have numerical rank close to p, so only a few
  // leading pairs are needed; fall back to the full decomposition otherwise.
  std::optional<Spectrum> spec;
  if (k > 0 && 4 * (k + 10) <= R.cols()) spec = truncated_svd(R, k);
  if (!spec) spec = full_svd(R);

  SensitivityDecomposition out;
  out.R = R;
  out.directions = spec->V.leftCols(k);
  for (Index c = 0; c < k; ++c) {
    Index arg = 0;
    out.directions.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.directions(arg, c) < 0.0) out.directions.col(c) *= -1.0;
  }
  out.components.resize(R.rows(), k);
  for (Index c = 0; c < k; ++c) out.components.col(c) = R * out.directions.col(c);
  out.eigenvalues = spec->sigma.head(k).array().square();
  return out;
}

SensitivityDecomposition principal_sensitivity(const Dataset& data, const Eigen::VectorXd& beta,
                                               const MTable& table, int threads) {
  SensitivityDecomposition out =
      principal_components(sensitivity_matrix(data, beta, table, threads), data.p());
  const TableValues fitted = evaluate(table, data.X * beta);
  out.residuals = data.transformed() - fitted.s;
  return out;
}

}  // namespace robustglm
