#pragma once

#include <string>
#include <vector>

#include "robustglm/mt_solver.hpp"

namespace robustglm {

enum class EstimatorKind { fmt, smt, lst, ml };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);
/// Comma-separated list, e.g. "fmt,ml".
std::vector<EstimatorKind> parse_estimator_list(const std::string& names);

struct EstimatorOptions {
  ModelTables tables;
  FmtConfig fmt{};
  SmtConfig smt{};
  SolverOptions lst{};
  SolverOptions ml{};
};

/// Fits one estimator and returns its final FitResult. The smt seed is taken
/// from opts.smt.seed.
FitResult run_estimator(EstimatorKind kind, const Dataset& data, const EstimatorOptions& opts);

}  // namespace robustglm
