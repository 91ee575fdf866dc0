#include "robustglm/mt_solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "robustglm/errors.hpp"
#include "robustglm/log.hpp"
#include "robustglm/parallel.hpp"

namespace robustglm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Linear predictor magnitude beyond which a nonconverged ML fit is declared
// divergent (fitted means below 1e-13 or above 1e13).
constexpr double kDivergentEta = 30.0;

}  // namespace

FitResult mt_fit(const Dataset& data, const MTable& table, const LossSpec& loss,
                 const Eigen::VectorXd& start, const SolverOptions& opts) {
  if (start.size() != data.p()) throw DomainError("mt_fit: start has wrong length");
  const Eigen::VectorXd T = data.transformed();
  const Index n = data.n();
  const Index p = data.p();

  FitResult fit;
  fit.beta = start;
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd rhs(n);

  while (fit.iterations < opts.max_iter) {
    const TableValues v = evaluate(table, data.X * fit.beta);
    Index rows = 0;
    for (Index i = 0; i < n; ++i) {
      const double u = T[i] - v.s[i];
      const double w = loss.weight(u);
      if (w == 0.0) continue;
      const double root = std::sqrt(w);
      design.row(rows) = (root * v.s_prime[i]) * data.X.row(i);
      rhs[rows] = root * u;
      ++rows;
    }
    if (rows == 0) {
      throw DegenerateWeightsError(
          "every residual lies beyond the rejection point; the start is too far from the data");
    }
    const LeastSquaresStep step = solve_least_squares(design.topRows(rows), rhs.head(rows));
    fit.degraded |= step.degraded;
    const Eigen::VectorXd next = fit.beta + step.delta;
    ++fit.iterations;
    if (!next.allFinite()) {
      throw DivergenceError("MT iterate became non-finite at iteration " +
                            std::to_string(fit.iterations));
    }
    const double change = relative_change(next, fit.beta);
    fit.beta = next;
    if (change <= opts.tol) {
      fit.converged = true;
      break;
    }
  }

  const TableValues v = evaluate(table, data.X * fit.beta);
  fit.weights.resize(n);
  fit.objective = 0.0;
  Eigen::VectorXd weighted_psi(n);
  for (Index i = 0; i < n; ++i) {
    const double u = T[i] - v.s[i];
    fit.objective += loss.rho(u);
    fit.weights[i] = v.s_prime[i] * v.s_prime[i] * loss.weight(u);
    weighted_psi[i] = v.s_prime[i] * loss.psi(u);
  }
  fit.eq_residual_norm = (data.X.transpose() * weighted_psi).lpNorm<Eigen::Infinity>();
  return fit;
}

FmtResult fmt(const Dataset& data, const ModelTables& tables, const FmtConfig& cfg) {
  FmtResult result;
  auto& tel = result.telemetry;

  auto t0 = Clock::now();
  Stage1Result s1 = stage1(data, tables, cfg.init);
  tel.seconds_stage1 = seconds_since(t0);
  tel.stage1 = std::move(s1.telemetry);
  tel.beta_stage1 = s1.fit.beta;

  t0 = Clock::now();
  Stage2Result s2 = stage2(data, s1.fit.beta, tables, cfg.init);
  tel.seconds_stage2 = seconds_since(t0);
  tel.stage2 = std::move(s2.telemetry);
  tel.beta_stage2 = s2.fit.beta;

  t0 = Clock::now();
  result.fit = mt_fit(data, *tables.robust, tables.loss, s2.fit.beta, cfg.final);
  tel.seconds_final = seconds_since(t0);
  return result;
}

FitResult ml_irls(const Dataset& data, const SolverOptions& opts) {
  const Index n = data.n();
  Eigen::VectorXd y = data.y.cast<double>();
  Eigen::VectorXd mu = y.array() + 0.1;
  Eigen::VectorXd eta = mu.array().log();

  FitResult fit;
  std::optional<Eigen::VectorXd> previous;
  while (fit.iterations < opts.max_iter) {
    const Eigen::VectorXd root = mu.array().sqrt();
    const Eigen::VectorXd working = eta.array() + (y - mu).array() / mu.array();
    const LeastSquaresStep step =
        solve_least_squares(root.asDiagonal() * data.X, root.cwiseProduct(working));
    fit.degraded |= step.degraded;
    ++fit.iterations;
    if (!step.delta.allFinite()) {
      throw DivergenceError("ML iterate became non-finite at iteration " +
                            std::to_string(fit.iterations));
    }
    fit.beta = step.delta;
    eta = data.X * fit.beta;
    mu = eta.array().exp();
    if (!mu.allFinite()) {
      throw DivergenceError("ML fitted means overflowed at iteration " +
                            std::to_string(fit.iterations));
    }
    if (previous && relative_change(fit.beta, *previous) <= opts.tol) {
      fit.converged = true;
      break;
    }
    previous = fit.beta;
  }

  fit.objective = 0.0;
  for (Index i = 0; i < n; ++i) {
    fit.objective += mu[i] - y[i] * eta[i] + std::lgamma(y[i] + 1.0);
  }
  fit.eq_residual_norm = (data.X.transpose() * (y - mu)).lpNorm<Eigen::Infinity>();
  fit.weights = mu;
  return fit;
}

FitResult ml_fit(const Dataset& data, const SolverOptions& opts) {
  FitResult fit = ml_irls(data, opts);
  if (!fit.converged) {
    const double extreme = (data.X * fit.beta).lpNorm<Eigen::Infinity>();
    if (extreme > kDivergentEta) {
      std::ostringstream msg;
      msg << "maximum likelihood estimate does not exist: linear predictor reached "
          << extreme << " after " << fit.iterations << " iterations";
      throw DivergenceError(msg.str());
    }
  }
  return fit;
}

namespace {

// Floyd's algorithm: p distinct indices from [0, n), sorted.
std::vector<Index> draw_subsample(std::mt19937_64& rng, Index n, Index p) {
  std::set<Index> chosen;
  for (Index j = n - p; j < n; ++j) {
    std::uniform_int_distribution<Index> pick(0, j);
    const Index t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

SmtResult smt(const Dataset& data, const ModelTables& tables, const SmtConfig& cfg) {
  if (cfg.subsamples < 1) throw DomainError("smt: need at least one subsample");
  const Index p = data.p();

  std::vector<std::optional<Candidate>> slots(static_cast<std::size_t>(cfg.subsamples));
  parallel_for(slots.size(), cfg.threads, [&](std::size_t s) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    for (int attempt = 0; attempt <= cfg.redraws; ++attempt) {
      const Dataset sub = data.subset(draw_subsample(rng, data.n(), p));
      if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(sub.X).rank() < p) continue;
      try {
        const FitResult ml = ml_irls(sub, {1e-8, cfg.subsample_ml_iter});
        const double objective = mt_objective(data, ml.beta, *tables.robust, tables.loss);
        if (std::isfinite(objective)) {
          slots[s] = Candidate{ml.beta, objective, CandidateSource::full, -1};
        }
      } catch (const Error& e) {
        log(LogLevel::debug, "subsample ", s, " skipped: ", e.what());
      }
      return;
    }
    log(LogLevel::debug, "subsample ", s, " skipped: singular after ", cfg.redraws, " redraws");
  });

  CandidateSet set;
  for (auto& slot : slots) {
    if (slot) set.candidates.push_back(std::move(*slot));
  }
  if (set.candidates.empty()) throw Error("smt: every subsample fit failed");

  SmtResult result;
  result.usable_subsamples = static_cast<int>(set.candidates.size());
  result.start = set.best().beta;
  result.fit = mt_fit(data, *tables.robust, tables.loss, result.start, cfg.final);
  return result;
}

std::uint64_t required_subsamples(double eps, int p, double target_prob) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("contamination fraction must lie in (0, 1)");
  if (!(target_prob > 0.0 && target_prob < 1.0)) {
    throw DomainError("target probability must lie in (0, 1)");
  }
  if (p < 1) throw DomainError("subsample size must be positive");

  const double clean = std::exp(p * std::log1p(-eps));  // (1 - eps)^p
  const double log_miss = std::log1p(-clean);             // log(1 - (1 - eps)^p)
  if (log_miss == -INFINITY) return 1;
  auto success = [&](double N) { return -std::expm1(N * log_miss) > target_prob; };

  const double ratio = std::log1p(-target_prob) / log_miss;
  if (ratio >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  auto N = static_cast<std::uint64_t>(std::max(1.0, std::ceil(ratio)));
  while (!success(static_cast<double>(N))) ++N;
  while (N > 1 && success(static_cast<double>(N - 1))) --N;
  return N;
}

}  // namespace robustglm
