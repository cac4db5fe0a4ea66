#include "anderson/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anderson/experiment.hpp"

namespace anderson {

namespace {

struct RunFlags {
  std::string config_path;
  std::optional<int> dimension;
  std::vector<double> disorder;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> n_min;
  std::optional<std::string> target;
  std::optional<std::string> mode;
  std::optional<std::string> output;
  std::optional<unsigned> jobs;
  std::optional<std::string> emit;
};

ExperimentConfig assemble(const RunFlags& flags) {
  ExperimentConfig config =
      flags.config_path.empty() ? ExperimentConfig{} : load_config(flags.config_path);
  if (flags.dimension) config.dimension = *flags.dimension;
  if (!flags.disorder.empty()) config.disorder = flags.disorder;
  if (!flags.seeds.empty()) config.seeds = flags.seeds;
  if (flags.n_max) config.n_max = *flags.n_max;
  if (flags.n_min) config.n_min = *flags.n_min;
  if (flags.target) config.target = parse_site(*flags.target, config.dimension);
  if (config.target && config.target->dimension() != config.dimension)
    throw ConfigError("target does not match the lattice dimension");
  if (flags.mode) config.mode = parse_mode(*flags.mode);
  if (flags.output) config.output = *flags.output;
  if (flags.jobs) config.jobs = *flags.jobs;
  if (flags.emit) config.emit = EmitFlags::parse(*flags.emit);
  if (config.seeds.empty()) config.seeds = {1};
  config.validate();
  return config;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Krylov distance experiments for the discrete random Schroedinger operator"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Compute distance sequences and fits for a sweep");
  run->add_option("--config", run_flags.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  run->add_option("--dim", run_flags.dimension, "Lattice dimension (1 or 2)");
  run->add_option("--c", run_flags.disorder, "Disorder strength, repeatable")->take_all();
  run->add_option("--seed", run_flags.seeds, "Realization seed, repeatable")->take_all();
  run->add_option("--n-max", run_flags.n_max, "Number of Krylov steps");
  run->add_option("--n-min", run_flags.n_min, "First step used by the fits");
  run->add_option("--target", run_flags.target, "Target site, e.g. 1,1");
  run->add_option("--mode", run_flags.mode, "Potential mode: fixed or fresh");
  run->add_option("--out", run_flags.output, "Output directory");
  run->add_option("--jobs", run_flags.jobs, "Worker threads");
  run->add_option("--emit", run_flags.emit,
                  "Comma list of distances,summary,energy,tridiagonal,power-energy");

  ValidationOptions validation;
  bool inject_fault = false;
  std::string report_path;
  std::vector<int> dims;
  std::vector<double> validation_disorder;
  std::vector<std::uint64_t> validation_seeds;
  CLI::App* validate = app.add_subcommand("validate", "Check the recurrence against its oracle");
  validate->add_option("--n-max", validation.n_max, "Steps per check (<= 64)");
  validate->add_option("--dim", dims, "Dimensions to check, repeatable")->take_all();
  validate->add_option("--c", validation_disorder, "Disorder values, repeatable")->take_all();
  validate->add_option("--seed", validation_seeds, "Seeds, repeatable")->take_all();
  validate->add_flag("--inject-fault", inject_fault,
                     "Drop the m_{n-1} correction to confirm the checks catch it");
  validate->add_option("--report", report_path, "Write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      const ExperimentConfig config = assemble(run_flags);
      const ExperimentResult result = run_experiment(config);
      for (const RunRecord& r : result.runs) {
        if (r.completed && r.summary) {
          std::cout << run_file_stem(r.c, r.seed) << ": a=" << r.summary->fit.exponent
                    << " y=" << r.summary->y_estimate << " L=" << r.summary->L_estimate
                    << " status=" << to_string(r.summary->status) << "\n";
        } else {
          std::cout << run_file_stem(r.c, r.seed) << ": FAILED " << r.error << "\n";
        }
      }
      return result.all_completed() ? kExitOk : kExitNumerical;
    }

    if (!dims.empty()) validation.dimensions = dims;
    if (!validation_disorder.empty()) validation.disorders = validation_disorder;
    if (!validation_seeds.empty()) validation.seeds = validation_seeds;
    for (const int d : validation.dimensions)
      if (d != 1 && d != 2) throw ConfigError("dimension must be 1 or 2");
    for (const double c : validation.disorders)
      if (!(c >= 0.0)) throw ConfigError("disorder values must be >= 0");
    if (inject_fault) validation.recurrence = Recurrence::DropPrevious;
    const ValidationReport report = run_validation(validation);
    std::cout << report.to_text();
    if (!report_path.empty()) {
      std::ofstream out(report_path);
      if (!out) throw ConfigError("cannot write report to " + report_path);
      out << report.to_json().dump(2) << "\n";
    }
    return report.passed() ? kExitOk : kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace anderson
