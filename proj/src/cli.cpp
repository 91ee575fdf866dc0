#include "robustglm/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "robustglm/csv.hpp"
#include "robustglm/errors.hpp"
#include "robustglm/estimators.hpp"
#include "robustglm/log.hpp"
#include "robustglm/lst_solver.hpp"
#include "robustglm/parallel.hpp"
#include "robustglm/sensitivity.hpp"
#include "robustglm/simulator.hpp"

#ifndef ROBUSTGLM_VERSION
#define ROBUSTGLM_VERSION "unknown"
#endif

namespace robustglm {

namespace {

using json = nlohmann::ordered_json;

struct CommonFlags {
  std::string output;
  int threads = 0;
  double c = kDefaultTuning;
  std::string loss = "bisquare";
  double alpha = 0.05;
  double tol = 1e-8;
  int max_iter = 100;
  bool verbose = false;
};

struct DataFlags {
  std::string data;
  std::string response = "y";
  bool no_intercept = false;
};

struct FitFlags {
  std::string estimator = "fmt";
  int subsamples = kDefaultSubsamples;
  std::uint64_t seed = 1;
};

struct SimFlags {
  int model = 1;
  Index n = 200;
  Index p = 10;
  int reps = 100;
  double eps = 0.10;
  std::string estimators = "fmt,ml";
  std::string x0_variant = "text";
  std::string y0_grid;
  bool paper_scale = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--output,-o", f.output, "Write results to this file instead of stdout");
  cmd->add_option("--threads", f.threads,
                  "Worker threads (0: ROBUSTGLM_THREADS, else all hardware threads)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--loss", f.loss, "Loss for the MT objective: bisquare or square")
      ->capture_default_str();
  cmd->add_option("--c", f.c, "Bisquare tuning constant")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Trimming level of the initial estimator")
      ->capture_default_str();
  cmd->add_option("--tol", f.tol, "Relative-change tolerance of the final fits")
      ->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "Iteration cap of the final fits")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--verbose,-v", f.verbose, "Log progress to stderr");
}

void add_data(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--data,-d", f.data, "CSV file with a header row")->required();
  cmd->add_option("--response,-r", f.response, "Name of the count response column")
      ->capture_default_str();
  cmd->add_flag("--no-intercept", f.no_intercept, "Do not prepend an intercept column");
}

int resolve_threads(int requested) { return requested > 0 ? requested : default_threads(); }

LossSpec make_loss(const CommonFlags& f) {
  if (parse_loss_kind(f.loss) == LossKind::square) return LossSpec::square();
  if (!(f.c > 0.0) || !std::isfinite(f.c)) throw InputError("--c must be a positive number");
  return LossSpec::bisquare(f.c);
}

SolverOptions solver_options(const CommonFlags& f) {
  if (!(f.tol > 0.0)) throw InputError("--tol must be positive");
  return {f.tol, f.max_iter};
}

EstimatorOptions estimator_options(const CommonFlags& common, const FitFlags& fit, int threads) {
  EstimatorOptions opts;
  opts.tables = ModelTables::get(make_loss(common), {}, threads);
  opts.fmt.init.alpha = common.alpha;
  opts.fmt.init.threads = threads;
  opts.fmt.init.validate();
  opts.fmt.final = solver_options(common);
  if (fit.subsamples < 1) throw InputError("--subsamples must be at least 1");
  opts.smt.subsamples = fit.subsamples;
  opts.smt.seed = fit.seed;
  opts.smt.threads = threads;
  opts.smt.final = solver_options(common);
  opts.lst = solver_options(common);
  opts.ml = solver_options(common);
  return opts;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

json coefficients_json(const Eigen::VectorXd& beta, const std::vector<std::string>& names) {
  json out = json::array();
  for (Index i = 0; i < beta.size(); ++i) {
    out.push_back({{"name", names[static_cast<std::size_t>(i)]}, {"estimate", number(beta[i])}});
  }
  return out;
}

// Writes to --output or `out`; the document never contains wall-clock times
// so that repeated runs compare byte for byte.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + path + "'");
  file << text;
  if (!file) throw InputError("failed writing '" + path + "'");
}

int cmd_fit(const CommonFlags& common, const DataFlags& df, const FitFlags& ff,
            std::ostream& out) {
  const int threads = resolve_threads(common.threads);
  const EstimatorKind kind = parse_estimator(ff.estimator);
  const LabeledDataset input = read_csv_file(df.data, df.response, !df.no_intercept);
  const EstimatorOptions opts = estimator_options(common, ff, threads);

  json doc;
  doc["estimator"] = to_string(kind);
  doc["loss"] = {{"kind", opts.tables.loss.name()}, {"c", opts.tables.loss.c}};
  doc["n"] = input.data.n();
  doc["p"] = input.data.p();

  FitResult fit;
  json telemetry = json::object();
  switch (kind) {
    case EstimatorKind::fmt: {
      FmtResult r = fmt(input.data, opts.tables, opts.fmt);
      const auto& t = r.telemetry;
      json stage1;
      stage1["iterations"] = t.stage1.iterations;
      stage1["objective_path"] = json::array();
      for (double v : t.stage1.objective_path) stage1["objective_path"].push_back(number(v));
      stage1["candidates_per_iteration"] = t.stage1.candidates_per_iteration;
      stage1["kept_per_iteration"] = t.stage1.kept_per_iteration;
      stage1["last_winner"] = to_string(t.stage1.last_winner);
      stage1["beta"] = vector_json(t.beta_stage1);
      json stage2;
      stage2["trimmed"] = t.stage2.trimmed;
      stage2["restored"] = t.stage2.restored;
      stage2["final_rows"] = t.stage2.final_rows.size();
      stage2["beta"] = vector_json(t.beta_stage2);
      telemetry["alpha"] = opts.fmt.init.alpha;
      telemetry["stage1"] = std::move(stage1);
      telemetry["stage2"] = std::move(stage2);
      fit = std::move(r.fit);
      break;
    }
    case EstimatorKind::smt: {
      SmtResult r = smt(input.data, opts.tables, opts.smt);
      telemetry["subsamples"] = opts.smt.subsamples;
      telemetry["usable_subsamples"] = r.usable_subsamples;
      telemetry["seed"] = opts.smt.seed;
      telemetry["start"] = vector_json(r.start);
      fit = std::move(r.fit);
      break;
    }
    case EstimatorKind::lst:
    case EstimatorKind::ml:
      fit = run_estimator(kind, input.data, opts);
      break;
  }

  doc["coefficients"] = coefficients_json(fit.beta, input.names);
  doc["converged"] = fit.converged;
  doc["degraded"] = fit.degraded;
  doc["iterations"] = fit.iterations;
  doc["objective"] = number(fit.objective);
  doc["eq_residual_norm"] = number(fit.eq_residual_norm);
  doc["telemetry"] = std::move(telemetry);
  doc["version"] = ROBUSTGLM_VERSION;
  emit(doc.dump(2) + "\n", common.output, out);

  if (!fit.converged) {
    log(LogLevel::warn, to_string(kind), " did not converge in ", fit.iterations, " iterations");
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_psc(const CommonFlags& common, const DataFlags& df, std::ostream& out) {
  const int threads = resolve_threads(common.threads);
  const LabeledDataset input = read_csv_file(df.data, df.response, !df.no_intercept);
  const Dataset& data = input.data;
  const ModelTables tables = ModelTables::get(LossSpec::square(), {}, threads);

  const FitResult full = lst_fit(data, *tables.square, std::nullopt, solver_options(common));
  const SensitivityDecomposition psc =
      principal_sensitivity(data, full.beta, *tables.square, threads);
  const Index k = psc.components.cols();

  // A row is flagged in column j when |z_ij| exceeds the median of |z_.j|.
  Eigen::VectorXd medians(k);
  for (Index j = 0; j < k; ++j) {
    std::vector<double> a(static_cast<std::size_t>(data.n()));
    for (Index i = 0; i < data.n(); ++i) a[static_cast<std::size_t>(i)] = std::abs(psc.components(i, j));
    std::sort(a.begin(), a.end());
    const std::size_t m = a.size();
    medians[j] = m % 2 == 1 ? a[m / 2] : 0.5 * (a[m / 2 - 1] + a[m / 2]);
  }

  std::ostringstream csv;
  csv << std::setprecision(17);
  csv << "index,residual";
  for (Index j = 0; j < k; ++j) csv << ",z_" << j + 1;
  for (Index j = 0; j < k; ++j) csv << ",flag_" << j + 1;
  csv << '\n';
  for (Index i = 0; i < data.n(); ++i) {
    csv << i << ',' << psc.residuals[i];
    for (Index j = 0; j < k; ++j) csv << ',' << psc.components(i, j);
    for (Index j = 0; j < k; ++j) {
      csv << ',' << (std::abs(psc.components(i, j)) > medians[j] ? 1 : 0);
    }
    csv << '\n';
  }
  emit(csv.str(), common.output, out);
  if (!full.converged) {
    log(LogLevel::warn, "LST fit did not converge in ", full.iterations, " iterations");
    return kExitNotConverged;
  }
  return kExitOk;
}

// "a:b:step" or "v1,v2,...".
std::vector<Count> parse_grid(const std::string& text) {
  auto to_count = [&](const std::string& s) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || v < 0) {
      throw InputError("invalid y0 grid entry '" + s + "'");
    }
    return static_cast<Count>(v);
  };
  std::vector<Count> grid;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::istringstream in(text);
    for (std::string s; std::getline(in, s, ':');) parts.push_back(s);
    if (parts.size() != 3) throw InputError("y0 grid range must look like start:stop:step");
    const Count a = to_count(parts[0]);
    const Count b = to_count(parts[1]);
    const Count step = to_count(parts[2]);
    if (step < 1 || b < a) throw InputError("y0 grid range needs step >= 1 and stop >= start");
    for (Count y = a; y <= b; y += step) grid.push_back(y);
  } else {
    std::istringstream in(text);
    for (std::string s; std::getline(in, s, ',');) grid.push_back(to_count(s));
  }
  if (grid.empty()) throw InputError("empty y0 grid");
  return grid;
}

int cmd_simulate(const CommonFlags& common, const FitFlags& ff, SimFlags sf,
                 const CLI::App& sub, std::ostream& out) {
  const int threads = resolve_threads(common.threads);
  if (sf.paper_scale) {
    if (sub.count("--n") == 0) sf.n = 1000;
    if (sub.count("--p") == 0) sf.p = 100;
    if (sub.count("--reps") == 0) sf.reps = 1000;
  }
  SimScenario scenario = make_scenario(sf.model, sf.n, sf.p, sf.eps, sf.reps, ff.seed,
                                       parse_x0_variant(sf.x0_variant));
  if (!sf.y0_grid.empty()) scenario.y0_grid = parse_grid(sf.y0_grid);
  scenario.validate();

  SimOptions opts;
  opts.estimator = estimator_options(common, ff, threads);
  opts.threads = threads;
  const SimResult result = run_mse_grid(scenario, parse_estimator_list(sf.estimators), opts);

  std::ostringstream csv;
  write_csv(result, csv);
  emit(csv.str(), common.output, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust Poisson regression with transformed M-estimators", "robustglm"};
  app.set_version_flag("--version", std::string(ROBUSTGLM_VERSION));
  app.require_subcommand(1);

  CommonFlags common;
  DataFlags data;
  FitFlags fit;
  SimFlags sim;

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit one estimator to a CSV data set");
  add_data(fit_cmd, data);
  add_common(fit_cmd, common);
  fit_cmd->add_option("--estimator,-e", fit.estimator, "fmt, smt, lst or ml")
      ->capture_default_str();
  fit_cmd->add_option("--subsamples", fit.subsamples, "Subsamples drawn by smt")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Seed of the smt subsample streams")
      ->capture_default_str();

  CLI::App* psc_cmd =
      app.add_subcommand("psc", "Residuals and principal sensitivity components of the LST fit");
  add_data(psc_cmd, data);
  add_common(psc_cmd, common);

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo MSE over a grid of outlier responses");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--model", sim.model, "Scenario 1, 2, 3 or 4 (high leverage)")
      ->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Observations per data set")->capture_default_str();
  sim_cmd->add_option("--p", sim.p, "Coefficients including the intercept")->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "Replications per grid cell")->capture_default_str();
  sim_cmd->add_option("--eps", sim.eps, "Contamination fraction (0 gives clean data)")
      ->capture_default_str();
  sim_cmd->add_option("--estimators", sim.estimators, "Comma-separated estimators")
      ->capture_default_str();
  sim_cmd->add_option("--x0-variant", sim.x0_variant, "Outlier position: text or caption")
      ->capture_default_str();
  sim_cmd->add_option("--y0-grid", sim.y0_grid,
                      "Outlier responses as start:stop:step or a comma list "
                      "(default 0..3 mu0 in steps of max(1, floor(mu0/10)))");
  sim_cmd->add_option("--subsamples", fit.subsamples, "Subsamples drawn by smt")
      ->capture_default_str();
  sim_cmd->add_option("--seed", fit.seed, "Base seed")->capture_default_str();
  sim_cmd->add_flag("--paper-scale", sim.paper_scale,
                    "Use n=1000, p=100, reps=1000 unless given explicitly");

  std::vector<std::string> argv_store{"robustglm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  const LogLevel previous = log_level();
  if (common.verbose) set_log_level(LogLevel::info);
  int code = kExitOk;
  try {
    if (*fit_cmd) {
      code = cmd_fit(common, data, fit, out);
    } else if (*psc_cmd) {
      code = cmd_psc(common, data, out);
    } else {
      code = cmd_simulate(common, fit, sim, *sim_cmd, out);
    }
  } catch (const InputError& e) {
    err << "robustglm: input error: " << e.what() << '\n';
    code = kExitInputError;
  } catch (const DomainError& e) {
    err << "robustglm: invalid argument: " << e.what() << '\n';
    code = kExitInputError;
  } catch (const Error& e) {
    err << "robustglm: estimation failed: " << e.what() << '\n';
    code = kExitNotConverged;
  }
  set_log_level(previous);
  return code;
}

}  // namespace robustglm
