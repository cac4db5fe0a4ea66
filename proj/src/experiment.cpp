#include "anderson/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include "anderson/energy.hpp"

namespace anderson {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Writes to <path>.tmp and renames on commit, so readers never see a
// half-written file under the final name.
class AtomicWriter {
 public:
  explicit AtomicWriter(fs::path path) : path_(std::move(path)), temp_(path_) {
    temp_ += ".tmp";
    out_.open(temp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open " + temp_.string() + " for writing");
  }
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;
  ~AtomicWriter() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(temp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + temp_.string());
    fs::rename(temp_, path_);
    committed_ = true;
  }

 private:
  fs::path path_;
  fs::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_file(const fs::path& path, const std::string& content) {
  AtomicWriter writer(path);
  writer.stream() << content;
  writer.commit();
}

// 17 significant digits: enough to round-trip a double.
void append_double(std::string& line, double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  line.append(buf, static_cast<std::size_t>(len));
}

void write_energy_rows(std::ostream& out, std::size_t k, const Eigen::VectorXd& profile,
                       Eigen::Index last_shell) {
  std::string line;
  for (Eigen::Index l = 0; l <= std::min(last_shell, profile.size() - 1); ++l) {
    line.clear();
    line += std::to_string(k);
    line += ',';
    line += std::to_string(l);
    line += ',';
    append_double(line, profile(l));
    line += '\n';
    out << line;
  }
}

template <typename T>
std::vector<T> as_list(const json& value) {
  if (value.is_array()) return value.get<std::vector<T>>();
  return {value.get<T>()};
}

std::string mode_name(PotentialMode mode) {
  return mode == PotentialMode::FixedRealization ? "fixed" : "fresh";
}

RunRecord execute_run(const ExperimentConfig& config, double c, std::uint64_t seed) {
  RunRecord record;
  record.c = c;
  record.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  const std::string stem = run_file_stem(c, seed);
  const fs::path dir = config.output;
  try {
    const RunConfig run_config = config.run_config(c, seed);
    const int source_radius = run_config.source.l1_norm();

    std::optional<AtomicWriter> energy;
    if (config.emit.energy) {
      energy.emplace(dir / (stem + "_energy.csv"));
      energy->stream() << "k,l,E\n";
    }
    std::vector<double> distances;
    distances.reserve(config.n_max + 1);
    const KrylovRun<double> run = run_krylov<double>(run_config, [&](const KrylovState<double>& s) {
      distances.push_back(s.distance());
      if (energy) {
        const EnergyProfile profile = energy_profile(s.m_curr, s.n);
        write_energy_rows(energy->stream(), s.n, profile.values,
                          static_cast<Eigen::Index>(s.n) + source_radius);
      }
    });
    record.broke_down = run.broke_down;
    if (energy) {
      energy->commit();
      record.files.push_back(stem + "_energy.csv");
    }

    if (config.emit.distances) {
      std::string text = "n,D\n";
      for (std::size_t n = 0; n < distances.size(); ++n) {
        text += std::to_string(n);
        text += ',';
        append_double(text, distances[n]);
        text += '\n';
      }
      write_file(dir / (stem + "_distances.csv"), text);
      record.files.push_back(stem + "_distances.csv");
    }

    if (config.emit.tridiagonal) {
      std::string text = "n,alpha,beta,gamma,drift_previous,drift_current\n";
      const auto& diag = run.state.diag_history;
      const auto& drift = run.state.drift;
      for (std::size_t n = 0; n < diag.size(); ++n) {
        text += std::to_string(n);
        for (const double v : {diag[n].alpha, diag[n].beta, diag[n].gamma, drift[n].with_previous,
                               drift[n].with_current}) {
          text += ',';
          append_double(text, v);
        }
        text += '\n';
      }
      write_file(dir / (stem + "_tridiagonal.csv"), text);
      record.files.push_back(stem + "_tridiagonal.csv");
    }

    if (config.emit.power_energy) {
      const Eigen::MatrixXd power = power_energy_evolution(run_config, config.n_max);
      AtomicWriter writer(dir / (stem + "_power_energy.csv"));
      writer.stream() << "k,l,E\n";
      for (Eigen::Index k = 0; k < power.rows(); ++k)
        write_energy_rows(writer.stream(), static_cast<std::size_t>(k), power.row(k).transpose(),
                          k + source_radius);
      writer.commit();
      record.files.push_back(stem + "_power_energy.csv");
    }

    const Eigen::Map<const Eigen::VectorXd> sequence(distances.data(),
                                                     static_cast<Eigen::Index>(distances.size()));
    record.summary = summarize_run(c, seed, sequence, config.analysis());
    record.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (config.emit.summary) {
      json j = summary_to_json(*record.summary, record.runtime_seconds);
      j["breakdown"] = record.broke_down;
      write_file(dir / (stem + "_summary.json"), j.dump(2) + "\n");
      record.files.push_back(stem + "_summary.json");
    }
    record.completed = true;
  } catch (const std::exception& e) {
    record.completed = false;
    record.error = e.what();
    record.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return record;
}

}  // namespace

EmitFlags EmitFlags::parse(std::string_view list) {
  EmitFlags flags{false, false, false, false, false};
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    const std::string_view item = list.substr(pos, comma - pos);
    if (item == "distances") flags.distances = true;
    else if (item == "summary") flags.summary = true;
    else if (item == "energy") flags.energy = true;
    else if (item == "tridiagonal") flags.tridiagonal = true;
    else if (item == "power-energy") flags.power_energy = true;
    else if (!item.empty()) throw ConfigError("unknown emit flag '" + std::string(item) + "'");
    pos = comma + 1;
  }
  return flags;
}

std::string EmitFlags::to_string() const {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(distances, "distances");
  add(summary, "summary");
  add(energy, "energy");
  add(tridiagonal, "tridiagonal");
  add(power_energy, "power-energy");
  return out;
}

void ExperimentConfig::validate() const {
  if (dimension != 1 && dimension != 2) throw ConfigError("dimension must be 1 or 2");
  if (disorder.empty()) throw ConfigError("at least one disorder value is required");
  for (const double c : disorder)
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("disorder values must be finite and >= 0");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (n_min + 2 > n_max)
    throw ConfigError("n_max must exceed n_min by at least 2 (n_min=" + std::to_string(n_min) +
                      ", n_max=" + std::to_string(n_max) + ")");
  if (n_max > 1'000'000) throw ConfigError("n_max is unreasonably large");
  if (target) {
    if (target->dimension() != dimension) throw ConfigError("target dimension mismatch");
    if (target->l1_norm() == 0) throw ConfigError("target must differ from the origin");
    if (target->l1_norm() > static_cast<int>(n_max) + 2)
      throw ConfigError("target lies farther than n_max + 2 from the origin");
  }
  if (grid.coarse.empty()) throw ConfigError("coarse exponent grid is empty");
  for (const auto* list : {&grid.coarse, &grid.refine})
    for (const double a : *list)
      if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("exponents must be positive");
  if (!(concavity_tolerance >= 0.0)) throw ConfigError("concavity tolerance must be >= 0");
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  if (output.empty()) throw ConfigError("output directory is required");
}

RunConfig ExperimentConfig::run_config(double c, std::uint64_t seed) const {
  RunConfig config = RunConfig::standard(DisorderSpec{dimension, c, seed, mode}, n_max);
  if (target) config.target = *target;
  return config;
}

AnalysisConfig ExperimentConfig::analysis() const {
  return AnalysisConfig{n_min, grid, concavity_tolerance};
}

SiteIndex parse_site(std::string_view text, int dimension) {
  std::vector<int> coords;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    int value = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || end != item.data() + item.size() || item.empty())
      throw ConfigError("cannot parse site '" + std::string(text) + "'");
    coords.push_back(value);
    pos = comma + 1;
  }
  if (static_cast<int>(coords.size()) != dimension)
    throw ConfigError("site '" + std::string(text) + "' needs " + std::to_string(dimension) +
                      " coordinate(s)");
  return dimension == 1 ? SiteIndex(coords[0]) : SiteIndex(coords[0], coords[1]);
}

PotentialMode parse_mode(std::string_view text) {
  if (text == "fixed") return PotentialMode::FixedRealization;
  if (text == "fresh") return PotentialMode::FreshPerStep;
  throw ConfigError("mode must be 'fixed' or 'fresh', got '" + std::string(text) + "'");
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig config;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "dimension") config.dimension = value.get<int>();
      else if (key == "disorder") config.disorder = as_list<double>(value);
      else if (key == "seeds") config.seeds = as_list<std::uint64_t>(value);
      else if (key == "n_max") config.n_max = value.get<std::size_t>();
      else if (key == "n_min") config.n_min = value.get<std::size_t>();
      else if (key == "target") {
        if (value.is_null()) config.target.reset();
        else if (value.is_string()) config.target = parse_site(value.get<std::string>(), j.value("dimension", config.dimension));
        else {
          const auto c = value.get<std::vector<int>>();
          if (c.size() == 1) config.target = SiteIndex(c[0]);
          else if (c.size() == 2) config.target = SiteIndex(c[0], c[1]);
          else throw ConfigError("target needs one or two coordinates");
        }
      } else if (key == "mode") config.mode = parse_mode(value.get<std::string>());
      else if (key == "grid") {
        if (value.contains("coarse")) config.grid.coarse = value.at("coarse").get<std::vector<double>>();
        if (value.contains("refine")) config.grid.refine = value.at("refine").get<std::vector<double>>();
      } else if (key == "concavity_tolerance") config.concavity_tolerance = value.get<double>();
      else if (key == "output") config.output = value.get<std::string>();
      else if (key == "jobs") config.jobs = value.get<unsigned>();
      else if (key == "emit") {
        if (value.is_string()) config.emit = EmitFlags::parse(value.get<std::string>());
        else {
          std::string joined;
          for (const auto& item : value) joined += item.get<std::string>() + ",";
          config.emit = EmitFlags::parse(joined);
        }
      } else throw ConfigError("unknown configuration key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return config;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration file " + path.string() + " is not valid JSON: " + e.what());
  }
}

json to_json(const ExperimentConfig& config) {
  json j;
  j["dimension"] = config.dimension;
  j["disorder"] = config.disorder;
  j["seeds"] = config.seeds;
  j["n_max"] = config.n_max;
  j["n_min"] = config.n_min;
  const RunConfig standard = RunConfig::standard(DisorderSpec{config.dimension}, config.n_max);
  const SiteIndex target = config.target.value_or(standard.target);
  j["target"] = config.dimension == 1 ? json::array({target[0]}) : json::array({target[0], target[1]});
  j["mode"] = mode_name(config.mode);
  j["grid"] = {{"coarse", config.grid.coarse}, {"refine", config.grid.refine}};
  j["concavity_tolerance"] = config.concavity_tolerance;
  j["output"] = config.output.string();
  j["jobs"] = config.jobs;
  j["emit"] = config.emit.to_string();
  return j;
}

std::string format_number(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::string run_file_stem(double c, std::uint64_t seed) {
  return "run_c" + format_number(c) + "_seed" + std::to_string(seed);
}

json summary_to_json(const RunSummary& s, double runtime_seconds) {
  return json{{"c", s.c},
              {"seed", s.seed},
              {"n_min", s.n_min},
              {"n_max", s.n_max},
              {"a", s.fit.exponent},
              {"slope", s.fit.slope},
              {"y", s.y_estimate},
              {"L", s.L_estimate},
              {"status", to_string(s.status)},
              {"shape", to_string(s.fit.shape)},
              {"sse", s.fit.sse},
              {"shape_at_smallest_exponent", to_string(s.shape_at_smallest_exponent)},
              {"lower_estimate_exceeds_intercept", s.lower_estimate_exceeds_intercept},
              {"runtime_seconds", runtime_seconds}};
}

json sweep_to_json(const SweepSummary& sweep) {
  json entries = json::array();
  for (const auto& [c, entry] : sweep.by_disorder) {
    entries.push_back({{"c", c},
                       {"min_y", entry.min_y ? json(*entry.min_y) : json(nullptr)},
                       {"min_L", entry.min_L ? json(*entry.min_L) : json(nullptr)},
                       {"ok", entry.ok_count},
                       {"not_applicable", entry.not_applicable_count}});
  }
  return json{{"disorders", entries}};
}

bool ExperimentResult::all_completed() const {
  for (const RunRecord& r : runs)
    if (!r.completed) return false;
  return true;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::error_code ec;
  fs::create_directories(config.output, ec);
  if (ec || !fs::is_directory(config.output))
    throw ConfigError("cannot create output directory " + config.output.string());

  std::vector<std::pair<double, std::uint64_t>> jobs;
  for (const double c : config.disorder)
    for (const std::uint64_t seed : config.seeds) jobs.emplace_back(c, seed);

  ExperimentResult result;
  result.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++)
      result.runs[k] = execute_run(config, jobs[k].first, jobs[k].second);
  };
  const unsigned workers = std::min<unsigned>(config.jobs, static_cast<unsigned>(jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  std::vector<RunSummary> summaries;
  for (const RunRecord& r : result.runs)
    if (r.completed && r.summary) summaries.push_back(*r.summary);
  result.sweep = aggregate_sweep(summaries);

  // Disorders whose runs all failed still get an entry with empty minima.
  SweepSummary listed = result.sweep;
  for (const double c : config.disorder) listed.by_disorder.try_emplace(c);
  json sweep = sweep_to_json(listed);
  sweep["dimension"] = config.dimension;
  sweep["n_max"] = config.n_max;
  sweep["n_min"] = config.n_min;
  for (json& entry : sweep["disorders"]) {
    std::size_t failed = 0;
    for (const RunRecord& r : result.runs)
      if (!r.completed && r.c == entry["c"].get<double>()) ++failed;
    entry["failed"] = failed;
  }
  write_file(config.output / "sweep_summary.json", sweep.dump(2) + "\n");

  json manifest;
  manifest["all_completed"] = result.all_completed();
  manifest["sweep_summary"] = "sweep_summary.json";
  manifest["runs"] = json::array();
  for (const RunRecord& r : result.runs) {
    json entry{{"c", r.c},
               {"seed", r.seed},
               {"status", r.completed ? "completed" : "failed"},
               {"breakdown", r.broke_down},
               {"files", r.files}};
    if (!r.completed) entry["error"] = r.error;
    manifest["runs"].push_back(entry);
  }
  write_file(config.output / "manifest.json", manifest.dump(2) + "\n");
  write_file(config.output / "config.json", to_json(config).dump(2) + "\n");
  return result;
}

int run_command(const ExperimentConfig& config) {
  return run_experiment(config).all_completed() ? 0 : 1;
}

}  // namespace anderson
