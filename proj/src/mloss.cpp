#include "robustglm/mloss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

#include "robustglm/errors.hpp"
#include "robustglm/log.hpp"
#include "robustglm/parallel.hpp"

namespace robustglm {

LossSpec LossSpec::bisquare(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw DomainError("bisquare tuning constant must be positive and finite");
  }
  return {LossKind::bisquare, c};
}

double LossSpec::rho(double u) const {
  if (kind == LossKind::square) return u * u;
  const double a = u / c;
  if (std::abs(a) >= 1.0) return 1.0;
  const double b = 1.0 - a * a;
  return 1.0 - b * b * b;
}

double LossSpec::psi(double u) const {
  if (kind == LossKind::square) return 2.0 * u;
  const double a = u / c;
  if (std::abs(a) >= 1.0) return 0.0;
  const double b = 1.0 - a * a;
  return 6.0 * u / (c * c) * b * b;
}

double LossSpec::weight(double u) const {
  if (kind == LossKind::square) return 2.0;
  const double a = u / c;
  if (std::abs(a) >= 1.0) return 0.0;
  const double b = 1.0 - a * a;
  return 6.0 / (c * c) * b * b;
}

std::string LossSpec::name() const {
  return kind == LossKind::square ? "square" : "bisquare";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "bisquare") return LossKind::bisquare;
  if (name == "square") return LossKind::square;
  throw InputError("unknown loss '" + name + "' (expected bisquare or square)");
}

namespace {

constexpr double kCoarseStep = 0.01;
constexpr double kGoldenTol = 1e-8;

// E_mu rho(t(y) - gamma) for the bisquare loss, restricted to the support.
// Terms with |t_k - gamma| >= c contribute exactly 1, so only the window
// around gamma is summed.
class BisquareRisk {
 public:
  BisquareRisk(double mu, double c) : c_(c) {
    const SupportRange range = pois_support(mu);
    for (Count k = range.lo; k <= range.hi; ++k) {
      t_.push_back(t_transform(k));
      p_.push_back(pois_pmf(k, mu));
      mass_ += p_.back();
    }
  }

  double operator()(double gamma) const {
    const auto first = std::upper_bound(t_.begin(), t_.end(), gamma - c_);
    const auto last = std::lower_bound(first, t_.end(), gamma + c_);
    double inside = 0.0;
    for (auto it = first; it != last; ++it) {
      const double a = (*it - gamma) / c_;
      const double b = 1.0 - a * a;
      inside += p_[static_cast<std::size_t>(it - t_.begin())] * b * b * b;
    }
    return mass_ - inside;
  }

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }

 private:
  double c_;
  double mass_ = 0.0;
  std::vector<double> t_;
  std::vector<double> p_;
};

double golden_section(const BisquareRisk& risk, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = risk(x1);
  double f2 = risk(x2);
  while (b - a > kGoldenTol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = risk(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = risk(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

double bisquare_m(double mu, double c) {
  if (mu == 0.0) return 0.0;
  const BisquareRisk risk(mu, c);

  // Grid points below t_min - c see rho = 1 everywhere and cannot win.
  const double upper = risk.t_max();
  const auto first =
      static_cast<long>(std::floor(std::max(0.0, risk.t_min() - c) / kCoarseStep));
  const auto last = static_cast<long>(std::floor(upper / kCoarseStep));

  long best = first;
  double best_value = risk(first * kCoarseStep);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(last - first + 1));
  values.push_back(best_value);
  for (long i = first + 1; i <= last; ++i) {
    const double v = risk(i * kCoarseStep);
    values.push_back(v);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  for (long i = first; i <= last; ++i) {
    if (std::abs(i - best) > 2 &&
        values[static_cast<std::size_t>(i - first)] - best_value <= 1e-12) {
      log(LogLevel::warn, "m(", mu, "): near-tie between gamma=", best * kCoarseStep,
          " and gamma=", i * kCoarseStep, "; keeping the smaller");
      break;
    }
  }

  const double lo = std::max(0.0, (best - 1) * kCoarseStep);
  const double hi = std::min(upper, (best + 1) * kCoarseStep);
  const double refined = golden_section(risk, lo, hi);
  return risk(refined) <= best_value ? refined : best * kCoarseStep;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

}  // namespace

double m_value(double mu, const LossSpec& loss, const PoissonLogModel& /*model*/) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw DomainError("m_value: mean must be finite and nonnegative");
  }
  if (loss.kind == LossKind::square) return expected_t(mu);
  return bisquare_m(mu, loss.c);
}

std::string GridConfig::describe() const {
  std::ostringstream out;
  out << std::setprecision(17) << mu_min << ':' << mu_max << ':' << nodes;
  return out.str();
}

MTable::MTable(LossSpec loss, GridConfig grid, std::vector<double> mu, std::vector<double> m)
    : loss_(loss), grid_(grid), mu_(std::move(mu)), m_(std::move(m)) {
  const std::size_t n = mu_.size();
  eta_min_ = std::log(grid_.mu_min);
  eta_max_ = std::log(grid_.mu_max);
  step_ = (eta_max_ - eta_min_) / static_cast<double>(n - 1);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (m_[i + 1] < m_[i]) {
      std::ostringstream msg;
      msg << "m is not monotone on the grid: m(" << mu_[i] << ")=" << m_[i] << " > m("
          << mu_[i + 1] << ")=" << m_[i + 1];
      throw TableBuildError(msg.str());
    }
  }

  // Fritsch-Carlson slopes on the uniform eta grid; the end slopes follow the
  // extensions so s' is continuous across the table edges.
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (m_[i + 1] - m_[i]) / step_;
  slope_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = secant[i - 1];
    const double b = secant[i];
    slope_[i] = (a > 0.0 && b > 0.0) ? 2.0 / (1.0 / a + 1.0 / b) : 0.0;
  }
  slope_.front() = std::clamp(m_.front(), 0.0, 3.0 * secant.front());
  slope_.back() = std::clamp(asymptote_slope(mu_.back()), 0.0, 3.0 * secant.back());
}

MTable MTable::from_values(const LossSpec& loss, const GridConfig& grid,
                           std::vector<double> m_values) {
  if (grid.nodes < 3 || !(grid.mu_min > 0.0) || !(grid.mu_max > grid.mu_min)) {
    throw TableBuildError("invalid grid " + grid.describe());
  }
  if (m_values.size() != static_cast<std::size_t>(grid.nodes)) {
    throw TableBuildError("table size does not match grid " + grid.describe());
  }
  const double lo = std::log(grid.mu_min);
  const double step = (std::log(grid.mu_max) - lo) / (grid.nodes - 1);
  std::vector<double> mu(m_values.size());
  for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = std::exp(lo + step * static_cast<double>(i));
  mu.back() = grid.mu_max;
  return MTable(loss, grid, std::move(mu), std::move(m_values));
}

MTable MTable::build(const LossSpec& loss, const GridConfig& grid, int threads) {
  if (grid.nodes < 3 || !(grid.mu_min > 0.0) || !(grid.mu_max > grid.mu_min)) {
    throw TableBuildError("invalid grid " + grid.describe());
  }
  const double lo = std::log(grid.mu_min);
  const double step = (std::log(grid.mu_max) - lo) / (grid.nodes - 1);
  std::vector<double> m(static_cast<std::size_t>(grid.nodes));
  parallel_for(m.size(), threads, [&](std::size_t i) {
    const double mu = i + 1 == m.size() ? grid.mu_max : std::exp(lo + step * static_cast<double>(i));
    m[i] = m_value(mu, loss);
  });
  return from_values(loss, grid, std::move(m));
}

double MTable::asymptote(double mu) const {
  const double root = std::sqrt(mu);
  return loss_.kind == LossKind::square ? 2.0 * root - 0.25 / root : 2.0 * root;
}

double MTable::asymptote_slope(double mu) const {
  const double root = std::sqrt(mu);
  return loss_.kind == LossKind::square ? root + 0.125 / root : root;
}

void MTable::eval(double eta, double& s_out, double& s_prime_out) const {
  if (eta >= eta_max_) {
    const double mu = std::exp(eta);
    s_out = m_.back() + asymptote(mu) - asymptote(mu_.back());
    s_prime_out = asymptote_slope(mu);
    return;
  }
  if (eta <= eta_min_) {
    s_out = m_.front() * std::exp(eta - eta_min_);
    s_prime_out = s_out;
    return;
  }
  if (std::isnan(eta)) {
    s_out = s_prime_out = eta;
    return;
  }
  const double pos = (eta - eta_min_) / step_;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), mu_.size() - 2);
  const double x = pos - static_cast<double>(i);
  const double x2 = x * x;
  const double x3 = x2 * x;
  const double m0 = m_[i];
  const double m1 = m_[i + 1];
  const double d0 = slope_[i] * step_;
  const double d1 = slope_[i + 1] * step_;
  s_out = (2 * x3 - 3 * x2 + 1) * m0 + (x3 - 2 * x2 + x) * d0 + (3 * x2 - 2 * x3) * m1 +
          (x3 - x2) * d1;
  s_prime_out = ((6 * x2 - 6 * x) * (m0 - m1) + (3 * x2 - 4 * x + 1) * d0 + (3 * x2 - 2 * x) * d1) /
                step_;
}

double MTable::s(double eta) const {
  double v = 0.0;
  double d = 0.0;
  eval(eta, v, d);
  return v;
}

double MTable::s_prime(double eta) const {
  double v = 0.0;
  double d = 0.0;
  eval(eta, v, d);
  return d;
}

double MTable::m(double mu) const {
  if (!(mu >= 0.0)) throw DomainError("MTable::m: mean must be nonnegative");
  return mu == 0.0 ? 0.0 : s(std::log(mu));
}

std::uint64_t MTable::grid_hash() const {
  return fnv1a(loss_.name() + '|' + format_double(loss_.c) + '|' + grid_.describe());
}

void MTable::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write table cache " + path.string());
  out << "# robustglm m-table\n";
  out << "# loss=" << loss_.name() << '\n';
  out << "# c=" << format_double(loss_.c) << '\n';
  out << "# grid=" << grid_.describe() << '\n';
  out << "# hash=" << std::hex << grid_hash() << std::dec << '\n';
  out << "mu,m\n";
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    out << format_double(mu_[i]) << ',' << format_double(m_[i]) << '\n';
  }
}

MTable MTable::load_csv(const std::filesystem::path& path, const LossSpec& loss,
                        const GridConfig& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TableBuildError("cannot open table cache " + path.string());

  std::map<std::string, std::string> header;
  std::string line;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    header[line.substr(2, eq - 2)] = line.substr(eq + 1);
  }
  if (line != "mu,m") throw TableBuildError("table cache missing 'mu,m' header");

  std::ostringstream expected_hash;
  expected_hash << std::hex
                << fnv1a(loss.name() + '|' + format_double(loss.c) + '|' + grid.describe());
  if (header["loss"] != loss.name() || header["grid"] != grid.describe() ||
      header["hash"] != expected_hash.str()) {
    throw TableBuildError("table cache " + path.string() +
                          " was built for a different loss or grid");
  }

  std::vector<double> m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw TableBuildError("malformed cache row: " + line);
    m.push_back(std::stod(line.substr(comma + 1)));
  }
  return from_values(loss, grid, std::move(m));
}

ModelTables ModelTables::get(const LossSpec& loss, const GridConfig& grid, int threads) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const MTable>> cache;

  auto fetch = [&](const LossSpec& l) {
    const std::string key = l.name() + '|' + format_double(l.c) + '|' + grid.describe();
    std::lock_guard lock(mutex);
    auto& slot = cache[key];
    if (!slot) slot = std::make_shared<const MTable>(MTable::build(l, grid, threads));
    return slot;
  };
  return {loss, fetch(LossSpec::square()), fetch(loss)};
}

}  // namespace robustglm
