#include <doctest.h>

#include <sstream>

#include "robustglm/errors.hpp"
#include "robustglm/simulator.hpp"
#include "support.hpp"

using namespace robustglm;

namespace {

EstimatorOptions options() {
  EstimatorOptions opts;
  opts.tables = support::bisquare_tables();
  opts.smt.subsamples = 200;
  return opts;
}

// Drops the mean_time_s column so that reruns compare byte for byte.
std::string without_timing(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string f;
    while (std::getline(row, f, ',')) fields.push_back(f);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == 9) continue;
      out << fields[i] << ',';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("model parameters") {
  CHECK(model_beta0(1, 5) == support::e2(5));
  CHECK(model_beta0(2, 3) == Eigen::Vector3d(2.0, 1.0, 0.0));
  CHECK(model_beta0(3, 3) == Eigen::Vector3d(2.0, 1.5, 0.0));
  CHECK(model_x0(4, 4, X0Variant::text) == Eigen::Vector4d(1.0, 3.0, 4.0, 0.0));
  CHECK(model_x0(4, 4, X0Variant::caption) == Eigen::Vector4d(3.0, 1.0, 0.0, 4.0));
  CHECK_THROWS_AS(model_beta0(5, 3), InputError);
  CHECK_THROWS_AS(model_x0(4, 3, X0Variant::caption), InputError);
  CHECK(parse_x0_variant("caption") == X0Variant::caption);
  CHECK_THROWS_AS(parse_x0_variant("figure"), InputError);
}

TEST_CASE("generated means follow the lognormal mean") {
  SimScenario s = make_scenario(1, 100000, 3, 0.0, 1, 11);
  Dataset d = generate_dataset(s, 0);
  CHECK(d.X.col(0).isOnes());
  CHECK(d.y.cast<double>().mean() == doctest::Approx(std::exp(0.5)).epsilon(0.02));

  s = make_scenario(2, 20000, 100, 0.0, 1, 12);
  d = generate_dataset(s, 0);
  CHECK(d.y.cast<double>().mean() == doctest::Approx(std::exp(2.5)).epsilon(0.05));
}

TEST_CASE("datasets are a pure function of seed and replication") {
  const SimScenario s = make_scenario(1, 50, 4, 0.1, 3, 5);
  const Dataset a = generate_dataset(s, 2);
  const Dataset b = generate_dataset(s, 2);
  const Dataset c = generate_dataset(s, 1);
  CHECK(support::bitwise_equal(a.X, b.X));
  CHECK(a.y == b.y);
  CHECK_FALSE(support::bitwise_equal(a.X, c.X));
}

TEST_CASE("contamination replaces the leading rows") {
  const SimScenario s = make_scenario(1, 95, 4, 0.1, 1, 3);
  const Dataset clean = generate_dataset(s, 0);
  const Dataset d = contaminate(clean, 0.1, s.x0, 33);
  for (Index i = 0; i < 9; ++i) {
    CHECK(d.X.row(i) == s.x0.transpose());
    CHECK(d.y[i] == 33);
  }
  CHECK(d.X.row(9) == clean.X.row(9));
  CHECK(d.y[9] == clean.y[9]);
  CHECK_THROWS_AS(contaminate(clean, 0.5, s.x0, 1), DomainError);
  CHECK_THROWS_AS(contaminate(clean, 0.1, Eigen::VectorXd::Zero(2), 1), DomainError);
}

TEST_CASE("default y0 grid") {
  const SimScenario s = make_scenario(1, 200, 10, 0.1, 1, 1);
  CHECK(s.mu0() == doctest::Approx(std::exp(3.0)));
  REQUIRE(s.y0_grid.size() == 31);
  CHECK(s.y0_grid.front() == 0);
  CHECK(s.y0_grid[1] == 2);
  CHECK(s.y0_grid.back() == 60);
}

TEST_CASE("clean scenario has one cell per estimator") {
  SimScenario s = make_scenario(1, 100, 3, 0.0, 5, 2);
  SimOptions opts{options(), 2};
  const SimResult r = run_mse_grid(s, {EstimatorKind::fmt, EstimatorKind::ml}, opts);
  REQUIRE(r.cells.size() == 2);
  for (const auto& c : r.cells) {
    CHECK_FALSE(c.y0.has_value());
    CHECK(c.n_ok + c.n_fail == 5);
    CHECK(c.mse == doctest::Approx(support::naive_mean(c.sq_errors)));
  }
}

TEST_CASE("grid cells account for every replication") {
  SimScenario s = make_scenario(1, 100, 3, 0.1, 4, 2);
  s.y0_grid = {0, 30, 60};
  SimOptions opts{options(), 3};
  const SimResult r = run_mse_grid(s, {EstimatorKind::fmt, EstimatorKind::smt, EstimatorKind::ml}, opts);
  REQUIRE(r.cells.size() == 9);
  for (const auto& c : r.cells) {
    CHECK(c.n_ok + c.n_fail == 4);
    CHECK(static_cast<int>(c.sq_errors.size()) == c.n_ok);
  }
  CHECK(r.cell(EstimatorKind::smt, 30).y0 == 30);
  CHECK_THROWS_AS(r.cell(EstimatorKind::lst, 30), InputError);
  CHECK(r.max_mse(EstimatorKind::ml) >= r.cell(EstimatorKind::ml, 0).mse);
}

TEST_CASE("mean squared error") {
  CHECK(mse_of({1.0, 2.0, 6.0}) == doctest::Approx(3.0));
  CHECK(std::isnan(mse_of({})));
}

TEST_CASE("results do not depend on the thread count") {
  SimScenario s = make_scenario(1, 80, 3, 0.1, 3, 9);
  s.y0_grid = {0, 40};
  const std::vector<EstimatorKind> est{EstimatorKind::fmt, EstimatorKind::smt};
  std::ostringstream one;
  std::ostringstream many;
  write_csv(run_mse_grid(s, est, {options(), 1}), one);
  write_csv(run_mse_grid(s, est, {options(), 4}), many);
  CHECK(without_timing(one.str()) == without_timing(many.str()));
}

TEST_CASE("CSV layout") {
  SimScenario s = make_scenario(1, 60, 3, 0.0, 2, 4);
  std::ostringstream out;
  write_csv(run_mse_grid(s, {EstimatorKind::ml}, {options(), 1}), out);
  std::istringstream in(out.str());
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "model,n,p,estimator,eps,y0,mse,n_ok,n_fail,mean_time_s,seed");
  CHECK(row.rfind("1,60,3,ml,0,NA,", 0) == 0);
  CHECK(row.substr(row.rfind(',') + 1) == "4");
}

TEST_CASE("scenario validation") {
  SimScenario s = make_scenario(1, 50, 3, 0.1, 1, 1);
  s.y0_grid.clear();
  CHECK_THROWS_AS(s.validate(), InputError);
  s = make_scenario(1, 3, 3, 0.1, 1, 1);
  CHECK_THROWS_AS(s.validate(), InputError);
  CHECK_THROWS_AS(make_scenario(1, 50, 1, 0.1, 1, 1), InputError);
}
