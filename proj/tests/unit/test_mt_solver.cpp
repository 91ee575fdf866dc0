#include <doctest.h>

#include "robustglm/errors.hpp"
#include "robustglm/lst_solver.hpp"
#include "robustglm/mt_solver.hpp"
#include "support.hpp"

using namespace robustglm;

namespace {

const ModelTables& tables() { return support::bisquare_tables(); }

Eigen::VectorXd x0_text(Index p) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p);
  x0[0] = 1.0;
  x0[1] = 3.0;
  return x0;
}

// mt_fit converges linearly, so give it room.
constexpr SolverOptions kPatient{1e-8, 2000};

}  // namespace

TEST_CASE("square loss reproduces the LST iterates") {
  const auto& sq = support::square_tables();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = support::poisson_data(seed, 200, support::e2(4));
    const Eigen::VectorXd start = Eigen::VectorXd::Zero(4);
    const FitResult a = mt_fit(d, *sq.square, LossSpec::square(), start);
    const FitResult b = lst_fit(d, *sq.square, start);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK((a.beta - b.beta).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("converged bisquare fits satisfy the estimating equation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = support::poisson_data(seed, 300, support::e2(5));
    const FitResult fit = mt_fit(d, *tables().robust, tables().loss, support::e2(5), kPatient);
    REQUIRE(fit.converged);
    CHECK(fit.eq_residual_norm <= 1e-6 * static_cast<double>(d.n()));
    CHECK(fit.eq_residual_norm ==
          doctest::Approx(mt_equation_residual(d, fit.beta, *tables().robust, tables().loss)));
    CHECK(fit.objective ==
          doctest::Approx(mt_objective(d, fit.beta, *tables().robust, tables().loss)));
  }
}

TEST_CASE("a start far from every observation has no usable weights") {
  const Dataset d = support::poisson_data(1, 100, support::e2(3));
  Eigen::VectorXd far = Eigen::VectorXd::Zero(3);
  far[0] = 12.0;
  CHECK_THROWS_AS(mt_fit(d, *tables().robust, tables().loss, far), DegenerateWeightsError);
}

TEST_CASE("rejected outliers do not move the iterates") {
  const Dataset clean = support::poisson_data(4, 200, support::e2(5));
  const Dataset a = support::plant(clean, 20, x0_text(5), 401);
  const Dataset b = support::plant(clean, 20, x0_text(5), 4010);
  const FitResult fa = mt_fit(a, *tables().robust, tables().loss, support::e2(5), kPatient);
  const FitResult fb = mt_fit(b, *tables().robust, tables().loss, support::e2(5), kPatient);
  CHECK(support::bitwise_equal(fa.beta, fb.beta));
  CHECK(fa.iterations == fb.iterations);
}

TEST_CASE("ML intercept-only fit is log of the mean") {
  Dataset d;
  const std::vector<Count> ys{0, 2, 3, 1, 7, 4, 4, 0, 5, 2};
  d.X = Eigen::MatrixXd::Ones(10, 1);
  d.y.resize(10);
  for (Index i = 0; i < 10; ++i) d.y[i] = ys[static_cast<std::size_t>(i)];
  const FitResult fit = ml_fit(d);
  REQUIRE(fit.converged);
  CHECK(fit.beta[0] == doctest::Approx(std::log(2.8)).epsilon(1e-10));
}

TEST_CASE("ML on an all-zero response has no estimate") {
  Dataset d = support::poisson_data(2, 50, support::e2(3));
  d.y.setZero();
  CHECK_THROWS_AS(ml_fit(d), DivergenceError);
}

TEST_CASE("ML satisfies the score equation") {
  const Dataset d = support::poisson_data(5, 500, support::e2(4));
  const FitResult fit = ml_fit(d);
  REQUIRE(fit.converged);
  CHECK(fit.eq_residual_norm <= 1e-6);
}

TEST_CASE("fmt agrees with ML on clean data") {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset d = support::poisson_data(1000 + seed, 1000, support::e2(5));
    const FitResult robust = fmt(d, tables()).fit;
    const FitResult ml = ml_fit(d);
    close += (robust.beta - ml.beta).norm() <= 0.2;
  }
  CHECK(close >= 90);
}

TEST_CASE("mt_fit from the ML start is consistent on clean data") {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset d = support::poisson_data(2000 + seed, 2000, support::e2(3));
    const FitResult fit = mt_fit(d, *tables().robust, tables().loss, ml_fit(d).beta, kPatient);
    close += (fit.beta - support::e2(3)).norm() <= 0.15;
  }
  CHECK(close >= 95);
}

TEST_CASE("fmt finds the same root as mt_fit started at ML") {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset d = support::poisson_data(3000 + seed, 500, support::e2(4));
    const FitResult a = fmt(d, tables()).fit;
    const FitResult b = mt_fit(d, *tables().robust, tables().loss, ml_fit(d).beta, kPatient);
    close += (a.beta - b.beta).norm() <= 0.1;
  }
  CHECK(close >= 90);
}

TEST_CASE("smt is a pure function of its seed") {
  const Dataset d = support::poisson_data(8, 200, support::e2(3));
  SmtConfig cfg;
  cfg.subsamples = 300;
  cfg.seed = 7;
  const SmtResult a = smt(d, tables(), cfg);
  cfg.threads = 4;
  const SmtResult b = smt(d, tables(), cfg);
  CHECK(support::bitwise_equal(a.fit.beta, b.fit.beta));
  CHECK(a.usable_subsamples == b.usable_subsamples);
  cfg.seed = 8;
  const SmtResult c = smt(d, tables(), cfg);
  CHECK_FALSE(support::bitwise_equal(a.start, c.start));
}

TEST_CASE("smt and fmt agree on small clean samples") {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = support::poisson_data(4000 + seed, 200, support::e2(3));
    SmtConfig cfg;
    cfg.subsamples = 500;
    cfg.seed = seed + 1;
    cfg.final = kPatient;
    FmtConfig fcfg;
    fcfg.final = kPatient;
    close += (smt(d, tables(), cfg).fit.beta - fmt(d, tables(), fcfg).fit.beta).norm() <= 0.2;
  }
  CHECK(close >= 18);
}

TEST_CASE("required subsample counts") {
  CHECK(required_subsamples(0.5, 1, 0.5) == 2);
  const auto big = required_subsamples(0.1, 100, 0.99);
  // log(0.01) / log(1 - 0.9^100)
  const double exact = std::log(0.01) / std::log1p(-std::pow(0.9, 100));
  CHECK(static_cast<double>(big) >= exact);
  CHECK(static_cast<double>(big) < exact + 1.0);
  CHECK(big > 170000);
  CHECK(big < 175000);
  CHECK(required_subsamples(1e-300, 5, 0.99) == 1);
  CHECK_THROWS_AS(required_subsamples(0.0, 5, 0.9), DomainError);
  CHECK_THROWS_AS(required_subsamples(0.1, 0, 0.9), DomainError);
  CHECK_THROWS_AS(required_subsamples(0.1, 5, 1.0), DomainError);
}

TEST_CASE("rescaling a covariate rescales its coefficient") {
  const Dataset d = support::poisson_data(9, 400, support::e2(4));
  Dataset scaled = d;
  scaled.X.col(2) *= 10.0;
  const FitResult a = mt_fit(d, *tables().robust, tables().loss, support::e2(4), kPatient);
  const FitResult b = mt_fit(scaled, *tables().robust, tables().loss, support::e2(4), kPatient);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(b.beta[2] * 10.0 == doctest::Approx(a.beta[2]).epsilon(1e-6));
  CHECK(b.beta[1] == doctest::Approx(a.beta[1]).epsilon(1e-6));
}

TEST_CASE("fmt does not depend on the thread count") {
  const Dataset d = support::plant(support::poisson_data(10, 300, support::e2(6)), 30,
                                   x0_text(6), 50);
  FmtConfig one;
  FmtConfig many;
  many.init.threads = 4;
  const FmtResult a = fmt(d, tables(), one);
  const FmtResult b = fmt(d, tables(), many);
  CHECK(support::bitwise_equal(a.fit.beta, b.fit.beta));
  CHECK(support::bitwise_equal(a.telemetry.beta_stage1, b.telemetry.beta_stage1));
}
