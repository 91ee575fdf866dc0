#include "robustglm/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "robustglm/errors.hpp"
#include "robustglm/log.hpp"
#include "robustglm/parallel.hpp"

#ifndef ROBUSTGLM_VERSION
#define ROBUSTGLM_VERSION "unknown"
#endif

namespace robustglm {

X0Variant parse_x0_variant(const std::string& name) {
  if (name == "text") return X0Variant::text;
  if (name == "caption") return X0Variant::caption;
  throw InputError("unknown x0 variant '" + name + "' (expected text or caption)");
}

Eigen::VectorXd model_beta0(int model, Index p) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  switch (model) {
    case 1:
    case 4: beta[1] = 1.0; break;
    case 2: beta[0] = 2.0; beta[1] = 1.0; break;
    case 3: beta[0] = 2.0; beta[1] = 1.5; break;
    default: throw InputError("model must be 1, 2, 3 or 4");
  }
  return beta;
}

Eigen::VectorXd model_x0(int model, Index p, X0Variant variant) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p);
  if (variant == X0Variant::text) {
    x0[0] = 1.0;
    x0[1] = 3.0;
  } else {
    x0[0] = 3.0;
    x0[1] = 1.0;
  }
  if (model == 4) {
    const Index slot = variant == X0Variant::text ? 2 : 3;
    if (p <= slot) throw InputError("the high-leverage model needs p >= " + std::to_string(slot + 1));
    x0[slot] = 4.0;
  }
  return x0;
}

void SimScenario::validate() const {
  if (model < 1 || model > 4) throw InputError("model must be 1, 2, 3 or 4");
  if (p < 2) throw InputError("simulation needs p >= 2");
  if (n <= p) throw InputError("simulation needs n > p");
  if (!(eps >= 0.0 && eps < 0.5)) throw InputError("contamination fraction must lie in [0, 0.5)");
  if (reps < 1) throw InputError("need at least one replication");
  if (beta0.size() != p || x0.size() != p) throw InputError("beta0 and x0 must have length p");
  if (eps > 0.0 && y0_grid.empty()) throw InputError("y0 grid is empty");
  for (Count y0 : y0_grid) {
    if (y0 < 0) throw InputError("y0 grid values must be nonnegative");
  }
}

SimScenario make_scenario(int model, Index n, Index p, double eps, int reps, std::uint64_t seed,
                          X0Variant variant) {
  SimScenario s;
  s.model = model;
  s.n = n;
  s.p = p;
  s.eps = eps;
  s.reps = reps;
  s.seed = seed;
  s.x0_variant = variant;
  if (p < 2) throw InputError("simulation needs p >= 2");
  s.beta0 = model_beta0(model, p);
  s.x0 = model_x0(model, p, variant);
  const double mu0 = s.mu0();
  const auto step = std::max<Count>(1, static_cast<Count>(std::floor(mu0 / 10.0)));
  const auto top = static_cast<Count>(std::floor(3.0 * mu0));
  for (Count y0 = 0; y0 <= top; y0 += step) s.y0_grid.push_back(y0);
  return s;
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), tag};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kDataTag = 0x64617461;  // "data"
constexpr std::uint32_t kSmtTag = 0x736d7400;

}  // namespace

Dataset generate_dataset(const SimScenario& scenario, int rep) {
  std::mt19937_64 rng = stream(scenario.seed, static_cast<std::uint64_t>(rep), 0, kDataTag);
  std::normal_distribution<double> normal(0.0, 1.0);

  Dataset data;
  data.X.resize(scenario.n, scenario.p);
  data.y.resize(scenario.n);
  for (Index i = 0; i < scenario.n; ++i) {
    data.X(i, 0) = 1.0;
    for (Index j = 1; j < scenario.p; ++j) data.X(i, j) = normal(rng);
    std::poisson_distribution<Count> draw(std::exp(data.X.row(i).dot(scenario.beta0)));
    data.y[i] = draw(rng);
  }
  return data;
}

Dataset contaminate(Dataset data, double eps, const Eigen::VectorXd& x0, Count y0) {
  if (!(eps >= 0.0 && eps < 0.5)) throw DomainError("contamination fraction must lie in [0, 0.5)");
  if (x0.size() != data.p()) throw DomainError("x0 must have length p");
  const auto count = static_cast<Index>(std::floor(eps * static_cast<double>(data.n())));
  for (Index i = 0; i < count; ++i) {
    data.X.row(i) = x0.transpose();
    data.y[i] = y0;
  }
  return data;
}

double mse_of(const std::vector<double>& sq_errors) {
  if (sq_errors.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double e : sq_errors) sum += e;
  return sum / static_cast<double>(sq_errors.size());
}

double SimResult::max_mse(EstimatorKind estimator) const {
  double best = -INFINITY;
  for (const auto& c : cells) {
    if (c.estimator == estimator && c.n_ok > 0) best = std::max(best, c.mse);
  }
  return best;
}

const SimCell& SimResult::cell(EstimatorKind estimator, std::optional<Count> y0) const {
  for (const auto& c : cells) {
    if (c.estimator == estimator && c.y0 == y0) return c;
  }
  throw InputError("no such simulation cell");
}

namespace {

double quantile_of(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
  return values[idx];
}

}  // namespace

SimResult run_mse_grid(const SimScenario& scenario, const std::vector<EstimatorKind>& estimators,
                       const SimOptions& opts) {
  scenario.validate();
  std::vector<std::optional<Count>> grid;
  if (scenario.eps == 0.0) {
    grid.push_back(std::nullopt);
  } else {
    grid.assign(scenario.y0_grid.begin(), scenario.y0_grid.end());
  }

  struct Outcome {
    bool ok = false;
    double sq_error = 0.0;
    double seconds = 0.0;
  };
  const std::size_t reps = static_cast<std::size_t>(scenario.reps);
  const std::size_t per_cell = reps * estimators.size();
  std::vector<Outcome> outcomes(grid.size() * per_cell);

  // Replications share one worker pool; estimator internals stay serial.
  EstimatorOptions inner = opts.estimator;
  inner.fmt.init.threads = 1;
  inner.smt.threads = 1;

  parallel_for(grid.size() * reps, opts.threads, [&](std::size_t task) {
    const std::size_t g = task / reps;
    const std::size_t r = task % reps;
    Dataset data = generate_dataset(scenario, static_cast<int>(r));
    if (grid[g]) data = contaminate(std::move(data), scenario.eps, scenario.x0, *grid[g]);

    for (std::size_t e = 0; e < estimators.size(); ++e) {
      EstimatorOptions local = inner;
      const auto y0_key = grid[g] ? static_cast<std::uint64_t>(*grid[g]) + 1 : 0;
      local.smt.seed = stream(scenario.seed, y0_key, r, kSmtTag)();
      Outcome& out = outcomes[g * per_cell + e * reps + r];
      const auto start = std::chrono::steady_clock::now();
      try {
        const FitResult fit = run_estimator(estimators[e], data, local);
        out.sq_error = (fit.beta - scenario.beta0).squaredNorm();
        out.ok = std::isfinite(out.sq_error);
      } catch (const Error& err) {
        log(LogLevel::debug, to_string(estimators[e]), " failed at rep ", r, ": ", err.what());
      }
      out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  SimResult result;
  result.scenario = scenario;
  result.version = ROBUSTGLM_VERSION;
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      SimCell cell;
      cell.estimator = estimators[e];
      cell.y0 = grid[g];
      std::vector<double> times;
      for (std::size_t r = 0; r < reps; ++r) {
        const Outcome& out = outcomes[g * per_cell + e * reps + r];
        times.push_back(out.seconds);
        if (out.ok) {
          cell.sq_errors.push_back(out.sq_error);
          ++cell.n_ok;
        } else {
          ++cell.n_fail;
        }
      }
      cell.mse = mse_of(cell.sq_errors);
      double total = 0.0;
      for (double t : times) total += t;
      cell.mean_time_s = total / static_cast<double>(times.size());
      cell.median_time_s = quantile_of(times, 0.5);
      cell.p90_time_s = quantile_of(times, 0.9);
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

void write_csv(const SimResult& result, std::ostream& out) {
  const SimScenario& s = result.scenario;
  out << "model,n,p,estimator,eps,y0,mse,n_ok,n_fail,mean_time_s,seed\n";
  for (const auto& c : result.cells) {
    std::ostringstream row;
    row << std::setprecision(10);
    row << s.model << ',' << s.n << ',' << s.p << ',' << to_string(c.estimator) << ',' << s.eps
        << ',';
    if (c.y0) {
      row << *c.y0;
    } else {
      row << "NA";
    }
    row << ',';
    if (c.n_ok > 0) {
      row << c.mse;
    } else {
      row << "NA";
    }
    row << ',' << c.n_ok << ',' << c.n_fail << ',' << c.mean_time_s << ',' << s.seed << '\n';
    out << row.str();
  }
}

}  // namespace robustglm
