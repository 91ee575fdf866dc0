#pragma once

// Deterministic two-stage robust initial estimator built from principal
// sensitivity components.

#include <string>
#include <vector>

#include "robustglm/dataset.hpp"
#include "robustglm/irwls.hpp"
#include "robustglm/mloss.hpp"
#include "robustglm/sensitivity.hpp"

namespace robustglm {

struct InitConfig {
  /// Two-sided trimming level; each tail is cut at alpha / 2.
  double alpha = 0.05;
  double stage1_tol = 1e-3;
  int stage1_max_iter = 10;
  SolverOptions lst{};
  int threads = 1;

  void validate() const;
};

enum class CandidateSource { full, psc_small, psc_large, psc_abs, prev, trimmed_lst };
std::string to_string(CandidateSource source);

struct Candidate {
  Eigen::VectorXd beta;
  /// Bounded-loss objective L(beta) over the full sample.
  double objective = 0.0;
  CandidateSource source = CandidateSource::full;
  /// Component index for the psc_* sources, -1 otherwise.
  Index component = -1;
};

struct CandidateSet {
  std::vector<Candidate> candidates;

  /// Lowest objective; the lowest index wins ties.
  const Candidate& best() const;
};

/// Rows kept by a candidate fit: n - floor(n/2) of them must be at least
/// max(p + 1, 2p).
Index min_kept_rows(Index p);

/// 3p half-sample LST fits from the components of `psc`, evaluated with the
/// bounded loss on `full`. Deletion is by smallest, largest and largest
/// absolute entries of each z_k, on the rows of `working`. Failed fits are
/// dropped with a log line.
std::vector<Candidate> deletion_candidates(const Dataset& working,
                                           const SensitivityDecomposition& psc,
                                           const Dataset& full, const ModelTables& tables,
                                           const InitConfig& cfg);

/// First-iteration set A_1: the full-sample LST fit followed by the 3p
/// deletion candidates.
CandidateSet candidate_set(const Dataset& data, const FitResult& full_lst,
                           const SensitivityDecomposition& psc, const ModelTables& tables,
                           const InitConfig& cfg);

/// Indices i with F^-1_{mu_i}(alpha/2) <= y_i <= F^-1_{mu_i}(1 - alpha/2),
/// mu_i = exp(x_i' beta), in increasing order.
std::vector<Index> trim_indices(const Dataset& data, const Eigen::VectorXd& beta, double alpha);

struct Stage1Telemetry {
  int iterations = 0;
  /// Rows kept by trimming at iterations 2, 3, ...
  std::vector<Index> kept_per_iteration;
  /// L(beta^(k)) for k = 1, 2, ...
  std::vector<double> objective_path;
  std::vector<std::size_t> candidates_per_iteration;
  CandidateSource last_winner = CandidateSource::full;
};

struct Stage1Result {
  FitResult fit;
  /// Full-sample LST fit from the first iteration.
  FitResult full_lst;
  Stage1Telemetry telemetry;
};

Stage1Result stage1(const Dataset& data, const ModelTables& tables, const InitConfig& cfg);

struct Stage2Telemetry {
  Index trimmed = 0;   // deleted by the stage-1 bounds
  Index restored = 0;  // deleted rows back within the refit's bounds
  std::vector<Index> final_rows;
};

struct Stage2Result {
  FitResult fit;
  Stage2Telemetry telemetry;
};

Stage2Result stage2(const Dataset& data, const Eigen::VectorXd& beta1, const ModelTables& tables,
                    const InitConfig& cfg);

}  // namespace robustglm
