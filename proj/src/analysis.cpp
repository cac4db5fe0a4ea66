#include "anderson/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "anderson/errors.hpp"

namespace anderson {

namespace {

struct RescaledPoints {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

// n = 0 has no finite n^-a, so the first usable index is at least 1.
std::size_t first_index(std::size_t n_min) { return std::max<std::size_t>(n_min, 1); }

RescaledPoints rescale(const SequenceRef& distances, std::size_t n_min, double exponent) {
  if (!(exponent > 0.0)) throw std::invalid_argument("rescaling exponent must be positive");
  const auto size = static_cast<std::size_t>(distances.size());
  if (size <= n_min + 2)
    throw std::invalid_argument("distance sequence of length " + std::to_string(size) +
                                " is too short for n_min = " + std::to_string(n_min));
  const std::size_t first = first_index(n_min);
  const auto count = static_cast<Eigen::Index>(size - first);
  RescaledPoints points{Eigen::VectorXd(count), distances.tail(count)};
  for (Eigen::Index k = 0; k < count; ++k)
    points.x(k) = std::pow(static_cast<double>(first + static_cast<std::size_t>(k)), -exponent);
  return points;
}

std::vector<double> sorted(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values;
}

RescaleFit search(const SequenceRef& distances, std::size_t n_min,
                  const std::vector<double>& exponents) {
  RescaleFit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (const double a : exponents) {
    const RescaleFit candidate = rescaled_fit(distances, n_min, a);
    if (candidate.sse < best.sse) best = candidate;
  }
  return best;
}

}  // namespace

LineFit fit_line(const SequenceRef& xs, const SequenceRef& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_line: xs and ys differ in length");
  if (xs.size() < 2) throw DegenerateFit("fit_line needs at least two points");
  const double n = static_cast<double>(xs.size());
  const double x_mean = xs.sum() / n;
  const double y_mean = ys.sum() / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (Eigen::Index k = 0; k < xs.size(); ++k) {
    const double dx = xs(k) - x_mean;
    sxx += dx * dx;
    sxy += dx * (ys(k) - y_mean);
  }
  if (sxx == 0.0) throw DegenerateFit("fit_line: all abscissae coincide");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  for (Eigen::Index k = 0; k < xs.size(); ++k) {
    const double r = ys(k) - (fit.slope * xs(k) + fit.intercept);
    fit.sse += r * r;
  }
  return fit;
}

ExponentGrid ExponentGrid::standard() {
  ExponentGrid grid;
  for (int k = 1; k <= 17; ++k) grid.coarse.push_back(k / 20.0);
  for (int k = 1; k <= 5; ++k) grid.refine.push_back(k / 100.0);
  return grid;
}

double ExponentGrid::smallest() const {
  double low = std::numeric_limits<double>::infinity();
  for (const double a : coarse) low = std::min(low, a);
  for (const double a : refine) low = std::min(low, a);
  if (!std::isfinite(low)) throw std::invalid_argument("exponent grid is empty");
  return low;
}

RescaleFit rescaled_fit(const SequenceRef& distances, std::size_t n_min, double exponent) {
  const RescaledPoints points = rescale(distances, n_min, exponent);
  const LineFit line = fit_line(points.x, points.y);
  RescaleFit fit;
  fit.exponent = exponent;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.sse = line.sse;
  return fit;
}

RescaleFit best_exponent(const SequenceRef& distances, std::size_t n_min, const ExponentGrid& grid,
                         double concavity_tolerance) {
  if (grid.coarse.empty()) throw std::invalid_argument("coarse exponent grid is empty");
  const std::vector<double> coarse = sorted(grid.coarse);
  RescaleFit best = search(distances, n_min, coarse);
  if (best.exponent == coarse.front() && !grid.refine.empty()) {
    std::vector<double> candidates = grid.refine;
    candidates.push_back(best.exponent);
    candidates = sorted(std::move(candidates));
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    best = search(distances, n_min, candidates);
  }
  best.shape = classify_shape(distances, best.exponent, n_min, concavity_tolerance);
  return best;
}

Shape classify_shape(const SequenceRef& distances, double exponent, std::size_t n_min,
                     double concavity_tolerance) {
  const RescaledPoints points = rescale(distances, n_min, exponent);
  const double x_min = points.x.minCoeff();
  const double x_max = points.x.maxCoeff();
  const double d_range = points.y.maxCoeff() - points.y.minCoeff();
  if (x_max == x_min || d_range == 0.0) return Shape::Indeterminate;

  // Centre and scale the abscissa; raw powers of n^-a are nearly collinear.
  const double mid = 0.5 * (x_max + x_min);
  const double half = 0.5 * (x_max - x_min);
  Eigen::MatrixXd design(points.x.size(), 3);
  design.col(0).setOnes();
  design.col(1) = (points.x.array() - mid) / half;
  design.col(2) = design.col(1).cwiseAbs2();
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(points.y);
  const double q = coef(2) / (half * half);
  const double tau = concavity_tolerance * d_range / ((x_max - x_min) * (x_max - x_min));
  if (q > tau) return Shape::Convex;
  if (q < -tau) return Shape::Concave;
  return Shape::Indeterminate;
}

InterceptEstimates intercept_estimates(const SequenceRef& distances, const RescaleFit& fit,
                                       std::size_t n_min) {
  const RescaledPoints points = rescale(distances, n_min, fit.exponent);
  InterceptEstimates est;
  est.y = fit.intercept;
  est.L = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k + 1 < points.x.size(); ++k) {
    const double slope = (points.y(k + 1) - points.y(k)) / (points.x(k + 1) - points.x(k));
    est.L = std::min(est.L, points.y(k) - slope * points.x(k));
  }
  return est;
}

RunSummary summarize_run(double c, std::uint64_t seed, const SequenceRef& distances,
                         const AnalysisConfig& config) {
  RunSummary summary;
  summary.c = c;
  summary.seed = seed;
  summary.n_min = config.n_min;
  summary.n_max = distances.size() > 0 ? static_cast<std::size_t>(distances.size() - 1) : 0;
  summary.fit = best_exponent(distances, config.n_min, config.grid, config.concavity_tolerance);
  const InterceptEstimates est = intercept_estimates(distances, summary.fit, config.n_min);
  summary.y_estimate = est.y;
  summary.L_estimate = est.L;
  summary.shape_at_smallest_exponent = classify_shape(distances, config.grid.smallest(),
                                                      config.n_min, config.concavity_tolerance);
  summary.status = summary.shape_at_smallest_exponent == Shape::Concave ? RunStatus::NotApplicable
                                                                        : RunStatus::Ok;
  summary.lower_estimate_exceeds_intercept =
      est.L > est.y + 1e-12 * std::max(1.0, std::abs(est.y));
  return summary;
}

SweepSummary aggregate_sweep(std::span<const RunSummary> summaries) {
  SweepSummary sweep;
  for (const RunSummary& run : summaries) {
    SweepEntry& entry = sweep.by_disorder[run.c];
    if (run.status == RunStatus::NotApplicable) {
      ++entry.not_applicable_count;
      continue;
    }
    ++entry.ok_count;
    entry.min_y = entry.min_y ? std::min(*entry.min_y, run.y_estimate) : run.y_estimate;
    entry.min_L = entry.min_L ? std::min(*entry.min_L, run.L_estimate) : run.L_estimate;
  }
  return sweep;
}

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::Convex: return "convex";
    case Shape::Concave: return "concave";
    case Shape::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

std::string to_string(RunStatus status) {
  return status == RunStatus::Ok ? "ok" : "n/a";
}

}  // namespace anderson
