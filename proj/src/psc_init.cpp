#include "robustglm/psc_init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustglm/errors.hpp"
#include "robustglm/log.hpp"
#include "robustglm/lst_solver.hpp"
#include "robustglm/parallel.hpp"

namespace robustglm {

void InitConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("trimming alpha must lie in (0, 0.5)");
  if (!(stage1_tol > 0.0)) throw DomainError("stage-1 tolerance must be positive");
  if (stage1_max_iter < 1) throw DomainError("stage-1 iteration cap must be at least 1");
}

std::string to_string(CandidateSource source) {
  switch (source) {
    case CandidateSource::full: return "full";
    case CandidateSource::psc_small: return "psc-small";
    case CandidateSource::psc_large: return "psc-large";
    case CandidateSource::psc_abs: return "psc-abs";
    case CandidateSource::prev: return "prev";
    case CandidateSource::trimmed_lst: return "trimmed-lst";
  }
  return "unknown";
}

const Candidate& CandidateSet::best() const {
  if (candidates.empty()) throw Error("empty candidate set");
  std::size_t arg = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].objective < candidates[arg].objective) arg = i;
  }
  return candidates[arg];
}

Index min_kept_rows(Index p) { return std::max(p + 1, 2 * p); }

namespace {

// Rows surviving deletion of the `drop` first entries of `order`, ascending.
std::vector<Index> surviving_rows(const std::vector<Index>& order, Index drop) {
  std::vector<Index> kept(order.begin() + drop, order.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<Index> order_by(const Eigen::VectorXd& key) {
  std::vector<Index> order(static_cast<std::size_t>(key.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return key[a] < key[b]; });
  return order;
}

}  // namespace

std::vector<Candidate> deletion_candidates(const Dataset& working,
                                           const SensitivityDecomposition& psc,
                                           const Dataset& full, const ModelTables& tables,
                                           const InitConfig& cfg) {
  const Index m = working.n();
  const Index drop = m / 2;
  if (m - drop < min_kept_rows(working.p())) {
    log(LogLevel::debug, "skipping deletion candidates: only ", m - drop,
        " rows would remain for p=", working.p());
    return {};
  }

  struct Task {
    std::vector<Index> rows;
    CandidateSource source;
    Index component;
  };
  std::vector<Task> tasks;
  for (Index k = 0; k < psc.components.cols(); ++k) {
    const Eigen::VectorXd z = psc.components.col(k);
    tasks.push_back({surviving_rows(order_by(z), drop), CandidateSource::psc_small, k});
    tasks.push_back({surviving_rows(order_by(-z), drop), CandidateSource::psc_large, k});
    tasks.push_back({surviving_rows(order_by(-z.cwiseAbs()), drop), CandidateSource::psc_abs, k});
  }

  std::vector<std::optional<Candidate>> slots(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    try {
      FitResult fit = lst_fit(working.subset(task.rows), *tables.square, std::nullopt, cfg.lst);
      const double objective = mt_objective(full, fit.beta, *tables.robust, tables.loss);
      if (!std::isfinite(objective)) throw DivergenceError("non-finite objective");
      slots[t] = Candidate{std::move(fit.beta), objective, task.source, task.component};
    } catch (const Error& e) {
      log(LogLevel::debug, "dropping ", to_string(task.source), " candidate for component ",
          task.component, ": ", e.what());
    }
  });

  std::vector<Candidate> out;
  for (auto& slot : slots) {
    if (slot) out.push_back(std::move(*slot));
  }
  return out;
}

CandidateSet candidate_set(const Dataset& data, const FitResult& full_lst,
                           const SensitivityDecomposition& psc, const ModelTables& tables,
                           const InitConfig& cfg) {
  CandidateSet set;
  set.candidates.push_back({full_lst.beta,
                            mt_objective(data, full_lst.beta, *tables.robust, tables.loss),
                            CandidateSource::full, -1});
  for (auto& c : deletion_candidates(data, psc, data, tables, cfg)) {
    set.candidates.push_back(std::move(c));
  }
  return set;
}

std::vector<Index> trim_indices(const Dataset& data, const Eigen::VectorXd& beta, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw DomainError("trimming alpha must lie in (0, 0.5)");
  const Eigen::VectorXd eta = data.X * beta;
  std::vector<Index> kept;
  kept.reserve(static_cast<std::size_t>(data.n()));
  for (Index i = 0; i < data.n(); ++i) {
    const double mu = std::exp(eta[i]);
    if (!std::isfinite(mu)) continue;
    if (data.y[i] < pois_quantile(alpha / 2.0, mu)) continue;
    if (data.y[i] > pois_quantile(1.0 - alpha / 2.0, mu)) continue;
    kept.push_back(i);
  }
  return kept;
}

Stage1Result stage1(const Dataset& data, const ModelTables& tables, const InitConfig& cfg) {
  cfg.validate();
  Stage1Result result;
  result.full_lst = lst_fit(data, *tables.square, std::nullopt, cfg.lst);

  const SensitivityDecomposition psc =
      principal_sensitivity(data, result.full_lst.beta, *tables.square, cfg.threads);
  const CandidateSet first = candidate_set(data, result.full_lst, psc, tables, cfg);
  Candidate current = first.best();

  auto& tel = result.telemetry;
  tel.iterations = 1;
  tel.objective_path.push_back(current.objective);
  tel.candidates_per_iteration.push_back(first.candidates.size());
  tel.last_winner = current.source;

  bool converged = cfg.stage1_max_iter == 1;
  for (int k = 2; k <= cfg.stage1_max_iter; ++k) {
    const std::vector<Index> kept = trim_indices(data, current.beta, cfg.alpha);
    if (static_cast<Index>(kept.size()) <= data.p()) {
      log(LogLevel::info, "stage 1 stopped at iteration ", k, ": trimming kept only ",
          kept.size(), " rows");
      break;
    }
    const Dataset working = data.subset(kept);

    CandidateSet set;
    set.candidates.push_back(current);
    set.candidates.back().source = CandidateSource::prev;
    try {
      const FitResult trimmed = lst_fit(working, *tables.square, std::nullopt, cfg.lst);
      set.candidates.push_back({trimmed.beta,
                                mt_objective(data, trimmed.beta, *tables.robust, tables.loss),
                                CandidateSource::trimmed_lst, -1});
      const SensitivityDecomposition psc_k =
          principal_sensitivity(working, trimmed.beta, *tables.square, cfg.threads);
      for (auto& c : deletion_candidates(working, psc_k, data, tables, cfg)) {
        set.candidates.push_back(std::move(c));
      }
    } catch (const Error& e) {
      log(LogLevel::debug, "stage 1 iteration ", k, ": trimmed-sample fit failed: ", e.what());
    }

    Candidate next = set.best();
    const double change = relative_change(next.beta, current.beta);
    tel.iterations = k;
    tel.kept_per_iteration.push_back(static_cast<Index>(kept.size()));
    tel.objective_path.push_back(next.objective);
    tel.candidates_per_iteration.push_back(set.candidates.size());
    tel.last_winner = next.source;
    current = std::move(next);
    if (change <= cfg.stage1_tol) {
      converged = true;
      break;
    }
  }

  result.fit.beta = current.beta;
  result.fit.objective = current.objective;
  result.fit.iterations = tel.iterations;
  result.fit.converged = converged;
  result.fit.eq_residual_norm =
      mt_equation_residual(data, current.beta, *tables.robust, tables.loss);
  return result;
}

Stage2Result stage2(const Dataset& data, const Eigen::VectorXd& beta1, const ModelTables& tables,
                    const InitConfig& cfg) {
  cfg.validate();
  Stage2Result result;
  auto& tel = result.telemetry;

  const std::vector<Index> kept = trim_indices(data, beta1, cfg.alpha);
  tel.trimmed = data.n() - static_cast<Index>(kept.size());
  if (tel.trimmed == 0) {
    tel.final_rows = kept;
    result.fit = lst_fit(data, *tables.square, std::nullopt, cfg.lst);
    return result;
  }
  if (static_cast<Index>(kept.size()) < min_kept_rows(data.p())) {
    log(LogLevel::warn, "stage 2: trimming kept only ", kept.size(),
        " rows; returning the stage-1 estimate");
    tel.final_rows = kept;
    result.fit.beta = beta1;
    result.fit.objective = mt_objective(data, beta1, *tables.robust, tables.loss);
    result.fit.eq_residual_norm = mt_equation_residual(data, beta1, *tables.robust, tables.loss);
    return result;
  }

  const FitResult reduced = lst_fit(data.subset(kept), *tables.square, std::nullopt, cfg.lst);

  std::vector<bool> in_final(static_cast<std::size_t>(data.n()), false);
  for (Index i : kept) in_final[static_cast<std::size_t>(i)] = true;
  const std::vector<Index> within = trim_indices(data, reduced.beta, cfg.alpha);
  for (Index i : within) {
    const auto idx = static_cast<std::size_t>(i);
    if (in_final[idx]) continue;
    in_final[idx] = true;
    ++tel.restored;
  }
  for (Index i = 0; i < data.n(); ++i) {
    if (in_final[static_cast<std::size_t>(i)]) tel.final_rows.push_back(i);
  }

  result.fit = lst_fit(data.subset(tel.final_rows), *tables.square, std::nullopt, cfg.lst);
  return result;
}

}  // namespace robustglm
