#include "robustglm/estimators.hpp"

#include <sstream>

#include "robustglm/errors.hpp"
#include "robustglm/lst_solver.hpp"

namespace robustglm {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::fmt: return "fmt";
    case EstimatorKind::smt: return "smt";
    case EstimatorKind::lst: return "lst";
    case EstimatorKind::ml: return "ml";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "fmt") return EstimatorKind::fmt;
  if (name == "smt") return EstimatorKind::smt;
  if (name == "lst") return EstimatorKind::lst;
  if (name == "ml") return EstimatorKind::ml;
  throw InputError("unknown estimator '" + name + "' (expected fmt, smt, lst or ml)");
}

std::vector<EstimatorKind> parse_estimator_list(const std::string& names) {
  std::vector<EstimatorKind> out;
  std::istringstream in(names);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_estimator(item));
  }
  if (out.empty()) throw InputError("empty estimator list");
  return out;
}

FitResult run_estimator(EstimatorKind kind, const Dataset& data, const EstimatorOptions& opts) {
  switch (kind) {
    case EstimatorKind::fmt: return fmt(data, opts.tables, opts.fmt).fit;
    case EstimatorKind::smt: return smt(data, opts.tables, opts.smt).fit;
    case EstimatorKind::lst: return lst_fit(data, *opts.tables.square, std::nullopt, opts.lst);
    case EstimatorKind::ml: return ml_fit(data, opts.ml);
  }
  throw InputError("unknown estimator");
}

}  // namespace robustglm
