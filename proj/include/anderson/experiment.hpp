#ifndef ANDERSON_EXPERIMENT_HPP
#define ANDERSON_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "anderson/analysis.hpp"
#include "anderson/krylov.hpp"
#include "anderson/lattice.hpp"

namespace anderson {

/// Invalid or inconsistent experiment configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EmitFlags {
  bool distances = true;
  bool summary = true;
  bool energy = false;
  bool tridiagonal = false;
  bool power_energy = false;

  /// Comma separated subset of distances,summary,energy,tridiagonal,power-energy.
  static EmitFlags parse(std::string_view list);
  std::string to_string() const;
};

struct ExperimentConfig {
  int dimension = 2;
  std::vector<double> disorder;
  std::vector<std::uint64_t> seeds;
  std::size_t n_max = 1500;
  std::size_t n_min = 200;
  std::optional<SiteIndex> target;
  PotentialMode mode = PotentialMode::FixedRealization;
  ExponentGrid grid = ExponentGrid::standard();
  double concavity_tolerance = kDefaultConcavityTolerance;
  std::filesystem::path output = "results";
  unsigned jobs = 1;
  EmitFlags emit;

  void validate() const;
  RunConfig run_config(double c, std::uint64_t seed) const;
  AnalysisConfig analysis() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

SiteIndex parse_site(std::string_view text, int dimension);
PotentialMode parse_mode(std::string_view text);

struct RunRecord {
  double c = 0.0;
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  std::optional<RunSummary> summary;
  bool broke_down = false;
  double runtime_seconds = 0.0;
  std::vector<std::string> files;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;  // in (c, seed) order of the configuration
  SweepSummary sweep;

  bool all_completed() const;
};

/// Runs every (c, seed) pair on a pool of `jobs` workers and writes, under
/// the output directory:
///   run_c<c>_seed<s>_distances.csv      header n,D
///   run_c<c>_seed<s>_summary.json
///   run_c<c>_seed<s>_energy.csv         header k,l,E (optional)
///   run_c<c>_seed<s>_power_energy.csv   header k,l,E (optional)
///   run_c<c>_seed<s>_tridiagonal.csv    (optional)
///   sweep_summary.json, manifest.json, config.json
/// Numeric content depends only on the configuration, not on `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// 0 when every run completed, 1 otherwise.
int run_command(const ExperimentConfig& config);

std::string run_file_stem(double c, std::uint64_t seed);
std::string format_number(double value);

nlohmann::json summary_to_json(const RunSummary& summary, double runtime_seconds);
nlohmann::json sweep_to_json(const SweepSummary& sweep);

// Validation ----------------------------------------------------------------

struct ValidationOptions {
  std::size_t n_max = 40;
  std::vector<int> dimensions{1, 2};
  std::vector<double> disorders{0.0, 0.1, 1.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  /// DropPrevious injects a known fault into the recurrence path.
  Recurrence recurrence = Recurrence::ThreeTerm;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  bool advisory = false;  // reported but does not affect ValidationReport::passed
  double worst = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult* find(std::string_view name) const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// Recurrence against the Gram-Schmidt oracle plus the operator and
/// distance invariants, all at small n.
ValidationReport run_validation(const ValidationOptions& options);

}  // namespace anderson

#endif  // ANDERSON_EXPERIMENT_HPP
