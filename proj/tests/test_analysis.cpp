#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "anderson/analysis.hpp"
#include "anderson/errors.hpp"

using namespace anderson;

namespace {

Eigen::VectorXd synthetic(std::size_t n_max, double limit, double amplitude, double exponent) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(n_max) + 1);
  d(0) = 1.0;
  for (Eigen::Index n = 1; n < d.size(); ++n)
    d(n) = limit + amplitude * std::pow(static_cast<double>(n), -exponent);
  return d;
}

double sse_of(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double slope, double intercept) {
  return (y - slope * x - Eigen::VectorXd::Constant(x.size(), intercept)).squaredNorm();
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("fit_line examples") {
  Eigen::VectorXd x(3), y(3);
  x << 0, 1, 2;
  y << 1, 3, 5;
  const LineFit exact = fit_line(x, y);
  CHECK(exact.slope == doctest::Approx(2.0));
  CHECK(exact.intercept == doctest::Approx(1.0));
  CHECK(exact.sse == doctest::Approx(0.0));

  y << 0, 1, 0;
  const LineFit flat = fit_line(x, y);
  CHECK(flat.slope == doctest::Approx(0.0));
  CHECK(flat.intercept == doctest::Approx(1.0 / 3.0));
  CHECK(flat.sse == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(fit_line(x.head(1), y.head(1)), DegenerateFit);
  CHECK_THROWS_AS(fit_line(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4)), DegenerateFit);
  CHECK_THROWS_AS(fit_line(x, y.head(2)), std::invalid_argument);
}

TEST_CASE("fit_line matches the normal equations and is least squares optimal") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index n = 50;
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(n, 0.1, 3.0);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) y(k) = 0.7 - 1.3 * x(k) + noise(rng);
    Eigen::MatrixXd design(n, 2);
    design.col(0) = x;
    design.col(1).setOnes();
    const Eigen::Vector2d normal =
        (design.transpose() * design).ldlt().solve(design.transpose() * y);
    const LineFit fit = fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(normal(0)).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(normal(1)).epsilon(1e-12));
    CHECK(fit.sse == doctest::Approx(sse_of(x, y, fit.slope, fit.intercept)).epsilon(1e-12));
    for (const double ds : {-1e-3, 1e-3})
      for (const double di : {-1e-3, 0.0, 1e-3})
        CHECK(sse_of(x, y, fit.slope + ds, fit.intercept + di) > fit.sse);
  }
}

TEST_CASE("standard exponent grid") {
  const ExponentGrid grid = ExponentGrid::standard();
  REQUIRE(grid.coarse.size() == 17);
  REQUIRE(grid.refine.size() == 5);
  CHECK(grid.coarse.front() == doctest::Approx(0.05));
  CHECK(grid.coarse.back() == doctest::Approx(0.85));
  CHECK(grid.smallest() == doctest::Approx(0.01));
  CHECK_THROWS_AS(ExponentGrid{}.smallest(), std::invalid_argument);
}

TEST_CASE("synthetic exponent recovery on the coarse grid") {
  for (const double a : {0.1, 0.3, 0.55, 0.85}) {
    const Eigen::VectorXd d = synthetic(1500, 0.5, 1.0, a);
    const RescaleFit fit = best_exponent(d, 200, ExponentGrid::standard());
    CHECK(fit.exponent == doctest::Approx(a).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(fit.intercept - 0.5) <= 1e-6);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.sse <= 1e-20);
  }
}

TEST_CASE("synthetic exponent recovery on the refinement grid") {
  const Eigen::VectorXd d = synthetic(1500, 0.7, 0.2, 0.03);
  const RescaleFit fit = best_exponent(d, 200, ExponentGrid::standard());
  CHECK(fit.exponent == doctest::Approx(0.03));
  CHECK(std::abs(fit.intercept - 0.7) <= 1e-6);
}

TEST_CASE("refinement is skipped unless the smallest coarse exponent wins") {
  ExponentGrid grid;
  grid.coarse = {0.05, 0.3};
  grid.refine = {0.01};
  const RescaleFit fit = best_exponent(synthetic(800, 0.5, 1.0, 0.3), 100, grid);
  CHECK(fit.exponent == doctest::Approx(0.3));
  const RescaleFit low = best_exponent(synthetic(800, 0.5, 1.0, 0.01), 100, grid);
  CHECK(low.exponent == doctest::Approx(0.01));
}

TEST_CASE("constant sequence") {
  const Eigen::VectorXd d = Eigen::VectorXd::Constant(400, 0.75);
  const RescaleFit fit = best_exponent(d, 50, ExponentGrid::standard());
  CHECK(fit.exponent == doctest::Approx(0.01));  // every exponent ties
  CHECK(fit.intercept == doctest::Approx(0.75));
  CHECK(fit.shape == Shape::Indeterminate);
  const RunSummary summary = summarize_run(0.0, 1, d, AnalysisConfig{50});
  CHECK(summary.status == RunStatus::Ok);
  CHECK(summary.y_estimate == doctest::Approx(0.75));
  CHECK(summary.L_estimate == doctest::Approx(0.75));
  CHECK_FALSE(summary.lower_estimate_exceeds_intercept);
}

TEST_CASE("shape classification examples") {
  const Eigen::VectorXd d = synthetic(1500, 0.5, 1.0, 0.3);
  CHECK(classify_shape(d, 0.3, 200) == Shape::Indeterminate);  // straight line
  CHECK(classify_shape(d, 0.15, 200) == Shape::Convex);        // D = 0.5 + x^2
  CHECK(classify_shape(d, 0.6, 200) == Shape::Concave);        // D = 0.5 + sqrt(x)
  const Eigen::VectorXd decreasing = synthetic(1500, 0.5, -1.0, 0.3);
  CHECK(classify_shape(decreasing, 0.15, 200) == Shape::Concave);
  CHECK(classify_shape(decreasing, 0.6, 200) == Shape::Convex);
}

TEST_CASE("concavity at the smallest exponent makes a run not applicable") {
  const Eigen::VectorXd d = synthetic(1500, 0.5, 0.3, 0.005);
  const RunSummary summary = summarize_run(0.2, 9, d);
  CHECK(summary.shape_at_smallest_exponent == Shape::Concave);
  CHECK(summary.status == RunStatus::NotApplicable);
  CHECK(summary.n_min == 200);
  CHECK(summary.n_max == 1500);
  CHECK(summary.lower_estimate_exceeds_intercept ==
        (summary.L_estimate > summary.y_estimate + 1e-12 * std::abs(summary.y_estimate)));
}

TEST_CASE("lower estimate against brute force") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  Eigen::VectorXd d = synthetic(300, 0.6, 0.5, 0.4);
  for (Eigen::Index n = 1; n < d.size(); ++n) d(n) += jitter(rng);
  const RescaleFit fit = rescaled_fit(d, 20, 0.4);
  double expected = std::numeric_limits<double>::infinity();
  for (std::size_t n = 20; n < 300; ++n) {
    const double x0 = std::pow(static_cast<double>(n), -0.4);
    const double x1 = std::pow(static_cast<double>(n + 1), -0.4);
    const double slope = (d(static_cast<Eigen::Index>(n + 1)) - d(static_cast<Eigen::Index>(n))) / (x1 - x0);
    expected = std::min(expected, d(static_cast<Eigen::Index>(n)) - slope * x0);
  }
  const InterceptEstimates est = intercept_estimates(d, fit, 20);
  CHECK(est.L == doctest::Approx(expected).epsilon(1e-12));
  CHECK(est.y == fit.intercept);
}

TEST_CASE("rescaled fit preconditions") {
  const Eigen::VectorXd d = synthetic(100, 0.5, 1.0, 0.3);
  CHECK_THROWS_AS(rescaled_fit(d, 99, 0.3), std::invalid_argument);
  CHECK_NOTHROW(rescaled_fit(d, 98, 0.3));
  CHECK_THROWS_AS(rescaled_fit(d, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rescaled_fit(d, 10, -0.2), std::invalid_argument);
  // n_min = 0 starts at n = 1.
  CHECK(rescaled_fit(d, 0, 0.3).sse == doctest::Approx(rescaled_fit(d, 1, 0.3).sse));
}

TEST_CASE("sweep aggregation") {
  std::vector<RunSummary> runs(4);
  runs[0].c = 0.1; runs[0].y_estimate = 0.8; runs[0].L_estimate = 0.7;
  runs[1].c = 0.1; runs[1].y_estimate = 0.6; runs[1].L_estimate = 0.75;
  runs[2].c = 0.1; runs[2].y_estimate = 0.1; runs[2].status = RunStatus::NotApplicable;
  runs[3].c = 0.5; runs[3].status = RunStatus::NotApplicable;
  const SweepSummary sweep = aggregate_sweep(runs);
  REQUIRE(sweep.by_disorder.size() == 2);
  const SweepEntry& low = sweep.by_disorder.at(0.1);
  CHECK(low.ok_count == 2);
  CHECK(low.not_applicable_count == 1);
  CHECK(*low.min_y == 0.6);
  CHECK(*low.min_L == 0.7);
  const SweepEntry& high = sweep.by_disorder.at(0.5);
  CHECK(high.ok_count == 0);
  CHECK_FALSE(high.min_y.has_value());
  CHECK(aggregate_sweep({}).by_disorder.empty());
}

TEST_CASE("analysis is deterministic") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(-1e-4, 1e-4);
  Eigen::VectorXd d = synthetic(1000, 0.8, 0.2, 0.2);
  for (Eigen::Index n = 1; n < d.size(); ++n) d(n) += jitter(rng);
  const RunSummary a = summarize_run(0.3, 1, d);
  const RunSummary b = summarize_run(0.3, 1, d);
  CHECK(a.fit.exponent == b.fit.exponent);
  CHECK(a.y_estimate == b.y_estimate);
  CHECK(a.L_estimate == b.L_estimate);
  CHECK(a.fit.sse == b.fit.sse);
}

TEST_CASE("names") {
  CHECK(to_string(Shape::Convex) == "convex");
  CHECK(to_string(Shape::Concave) == "concave");
  CHECK(to_string(Shape::Indeterminate) == "indeterminate");
  CHECK(to_string(RunStatus::Ok) == "ok");
  CHECK(to_string(RunStatus::NotApplicable) == "n/a");
}

}  // TEST_SUITE
