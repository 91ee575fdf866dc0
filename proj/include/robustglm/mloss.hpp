#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "robustglm/families.hpp"

namespace robustglm {

enum class LossKind { bisquare, square };

/// Default bisquare tuning constant on the 2 sqrt(y) scale.
inline constexpr double kDefaultTuning = 3.0;

/// A rho/psi pair. Bisquare rho is normalized so that sup rho = 1.
struct LossSpec {
  LossKind kind = LossKind::bisquare;
  double c = kDefaultTuning;

  static LossSpec bisquare(double c = kDefaultTuning);
  static LossSpec square() { return {LossKind::square, 1.0}; }

  double rho(double u) const;
  double psi(double u) const;
  /// psi(u) / u, continuously extended by psi'(0) at u = 0.
  double weight(double u) const;

  bool bounded() const { return kind == LossKind::bisquare; }
  std::string name() const;

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

/// Parses "bisquare" or "square".
LossKind parse_loss_kind(const std::string& name);

/// m(mu) = argmin_gamma E_mu rho(t(y) - gamma). For square loss this is E_mu t(y).
/// Bisquare: coarse grid (step 0.01) then golden section to 1e-8; the
/// smallest minimizer wins ties.
double m_value(double mu, const LossSpec& loss, const PoissonLogModel& model = {});

struct GridConfig {
  double mu_min = 1e-3;
  double mu_max = 1e5;
  int nodes = 481;

  /// Stable text form, e.g. "0.001:100000:481".
  std::string describe() const;
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

/// Tabulated m(mu) with s(eta) = m(exp(eta)) as a monotone (PCHIP) cubic in
/// eta = log(mu) and s'(eta) as the exact derivative of that interpolant.
///
/// Beyond mu_max, s follows the shape of the large-mean asymptote
/// (2 sqrt(mu), minus 1/(4 sqrt(mu)) for square loss) anchored at the last
/// node. Below mu_min, m is linear in mu down to m(0) = 0.
class MTable {
 public:
  /// Builds the table; throws TableBuildError if m decreases along the grid.
  static MTable build(const LossSpec& loss, const GridConfig& grid = {},
                      int threads = 1);

  /// Builds from precomputed node values (used by the cache loader).
  static MTable from_values(const LossSpec& loss, const GridConfig& grid,
                            std::vector<double> m_values);

  double s(double eta) const;
  double s_prime(double eta) const;
  /// Both at once; the hot path in every IRWLS iteration.
  void eval(double eta, double& s_out, double& s_prime_out) const;

  double m(double mu) const;

  const LossSpec& loss() const { return loss_; }
  const GridConfig& grid() const { return grid_; }
  const std::vector<double>& mu_grid() const { return mu_; }
  const std::vector<double>& m_values() const { return m_; }

  /// FNV-1a over loss kind, c and the grid spec.
  std::uint64_t grid_hash() const;

  /// CSV cache: '#' header lines with loss, c, grid and hash, then "mu,m".
  void save_csv(const std::filesystem::path& path) const;
  /// Throws TableBuildError when the header does not match loss and grid.
  static MTable load_csv(const std::filesystem::path& path, const LossSpec& loss,
                         const GridConfig& grid);

 private:
  MTable(LossSpec loss, GridConfig grid, std::vector<double> mu, std::vector<double> m);

  double asymptote(double mu) const;
  double asymptote_slope(double mu) const;  // d asymptote / d eta

  LossSpec loss_;
  GridConfig grid_;
  std::vector<double> mu_;
  std::vector<double> m_;
  std::vector<double> slope_;  // ds/deta at the nodes
  double eta_min_ = 0.0;
  double eta_max_ = 0.0;
  double step_ = 0.0;
};

/// Square-loss table and loss table for one tuning configuration.
struct ModelTables {
  LossSpec loss;
  std::shared_ptr<const MTable> square;
  std::shared_ptr<const MTable> robust;

  /// Builds once per (loss, grid) and memoizes for the process lifetime.
  static ModelTables get(const LossSpec& loss, const GridConfig& grid = {},
                         int threads = 1);
};

}  // namespace robustglm
