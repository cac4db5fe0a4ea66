#ifndef ANDERSON_ANALYSIS_HPP
#define ANDERSON_ANALYSIS_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anderson {

using SequenceRef = Eigen::Ref<const Eigen::VectorXd>;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept. Throws DegenerateFit
/// when fewer than two points are given or all xs coincide.
LineFit fit_line(const SequenceRef& xs, const SequenceRef& ys);

enum class Shape { Convex, Concave, Indeterminate };

/// Exponents tried for the substitution x = n^-a. The refinement grid is only
/// searched when the coarse winner is the smallest coarse exponent.
struct ExponentGrid {
  std::vector<double> coarse;
  std::vector<double> refine;

  /// 0.05:0.05:0.85 refined by 0.01:0.01:0.05.
  static ExponentGrid standard();
  double smallest() const;
};

struct RescaleFit {
  double exponent = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
  Shape shape = Shape::Indeterminate;
};

inline constexpr double kDefaultConcavityTolerance = 1e-3;

/// Least-squares line through (n^-a, D^n), n = n_min .. N, for one exponent.
RescaleFit rescaled_fit(const SequenceRef& distances, std::size_t n_min, double exponent);

/// Picks the exponent whose rescaled line has the smallest residual; ties go
/// to the smaller exponent. The returned shape is classified at that exponent.
RescaleFit best_exponent(const SequenceRef& distances, std::size_t n_min, const ExponentGrid& grid,
                         double concavity_tolerance = kDefaultConcavityTolerance);

/// Sign of the quadratic coefficient of a least-squares parabola in
/// x = n^-a, against tau = tol * (max D - min D) / (max x - min x)^2.
Shape classify_shape(const SequenceRef& distances, double exponent, std::size_t n_min,
                     double concavity_tolerance = kDefaultConcavityTolerance);

struct InterceptEstimates {
  double y = 0.0;  // intercept of the fitted line
  double L = 0.0;  // lowest intercept of a line through consecutive points
};

InterceptEstimates intercept_estimates(const SequenceRef& distances, const RescaleFit& fit,
                                       std::size_t n_min);

struct AnalysisConfig {
  std::size_t n_min = 200;
  ExponentGrid grid = ExponentGrid::standard();
  double concavity_tolerance = kDefaultConcavityTolerance;
};

enum class RunStatus { Ok, NotApplicable };

struct RunSummary {
  double c = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_min = 0;
  std::size_t n_max = 0;
  RescaleFit fit;
  double y_estimate = 0.0;
  double L_estimate = 0.0;
  RunStatus status = RunStatus::Ok;
  /// Shape at the smallest exponent of the grid; Concave there means N/A.
  Shape shape_at_smallest_exponent = Shape::Indeterminate;
  /// Set when L exceeds y. The values are reported unclamped.
  bool lower_estimate_exceeds_intercept = false;
};

RunSummary summarize_run(double c, std::uint64_t seed, const SequenceRef& distances,
                         const AnalysisConfig& config = {});

struct SweepEntry {
  std::optional<double> min_y;
  std::optional<double> min_L;
  std::size_t ok_count = 0;
  std::size_t not_applicable_count = 0;
};

struct SweepSummary {
  std::map<double, SweepEntry> by_disorder;
};

SweepSummary aggregate_sweep(std::span<const RunSummary> summaries);

std::string to_string(Shape shape);
std::string to_string(RunStatus status);

}  // namespace anderson

#endif  // ANDERSON_ANALYSIS_HPP
