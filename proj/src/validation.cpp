#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "anderson/experiment.hpp"
#include "anderson/krylov.hpp"
#include "anderson/lattice.hpp"

namespace anderson {

namespace {

struct Worst {
  double value = 0.0;
  std::string where;

  void update(double candidate, const std::string& label) {
    if (where.empty() || candidate > value || std::isnan(candidate)) {
      value = candidate;
      where = label;
    }
  }
};

CheckResult make_check(std::string name, const Worst& worst, double tolerance) {
  CheckResult check;
  check.name = std::move(name);
  check.worst = worst.value;
  check.tolerance = tolerance;
  check.passed = std::isfinite(worst.value) && worst.value <= tolerance;
  check.detail = worst.where;
  return check;
}

std::string label(int dimension, double c, std::uint64_t seed) {
  std::ostringstream out;
  out << "d=" << dimension << " c=" << c << " seed=" << seed;
  return out.str();
}

Field<double> random_field(int dimension, int half_width, int radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Field<double> f(dimension, half_width);
  f.for_each_site(radius, [&](int i, int j) {
    f.set(dimension == 2 ? SiteIndex(i, j) : SiteIndex(j), uniform(rng));
  });
  return f;
}

}  // namespace

ValidationReport run_validation(const ValidationOptions& options) {
  if (options.n_max == 0 || options.n_max > kOracleMaxSteps)
    throw ConfigError("validation n_max must lie in [1, " + std::to_string(kOracleMaxSteps) + "]");

  Worst oracle_gap, local_drift, three_term, orthonormality, monotone, identity, shift_gap,
      recurrence_shift_gap, self_adjoint, potential_range;

  for (const int dimension : options.dimensions) {
    for (const double c : options.disorders) {
      for (const std::uint64_t seed : options.seeds) {
        const std::string where = label(dimension, c, seed);
        const DisorderSpec spec{dimension, c, seed, PotentialMode::FixedRealization};
        RunConfig config = RunConfig::standard(spec, options.n_max);
        config.recurrence = options.recurrence;

        std::vector<double> distances;
        double overlap_sum = 0.0;
        const KrylovRun<double> run = run_krylov<double>(config, [&](const KrylovState<double>& s) {
          distances.push_back(s.distance());
          overlap_sum += s.target_entry * s.target_entry;
          identity.update(std::abs(s.distance_sq - (1.0 - overlap_sum)), where);
        });
        for (const OrthogonalityDrift& d : run.state.drift)
          local_drift.update(std::max(std::abs(d.with_previous), std::abs(d.with_current)), where);
        for (std::size_t n = 1; n < distances.size(); ++n)
          monotone.update(std::max(0.0, distances[n] - distances[n - 1]), where);

        const OracleResult oracle = oracle_distance_sequence(config);
        const std::size_t common =
            std::min(distances.size(), static_cast<std::size_t>(oracle.distances.size()));
        if (common != distances.size() || run.broke_down) oracle_gap.update(std::numeric_limits<double>::infinity(), where + " (breakdown)");
        for (std::size_t n = 0; n < common; ++n)
          oracle_gap.update(std::abs(distances[n] - oracle.distances(static_cast<Eigen::Index>(n))), where);

        const Eigen::Index columns = static_cast<Eigen::Index>(common);
        const auto q = oracle.basis.leftCols(columns);
        const Eigen::MatrixXd gram = q.transpose() * q;
        orthonormality.update(
            (gram - Eigen::MatrixXd::Identity(columns, columns)).cwiseAbs().maxCoeff(), where);
        for (Eigen::Index n = 2; n + 1 < columns; ++n)
          three_term.update(oracle.coefficients.col(n).head(n - 1).cwiseAbs().maxCoeff(), where);

        for (const double shift : {-2.0 * dimension, 3.5}) {
          RunConfig shifted = config;
          shifted.diagonal_shift = shift;
          const OracleResult moved_oracle = oracle_distance_sequence(shifted);
          const Eigen::Index span =
              std::min(moved_oracle.distances.size(), oracle.distances.size());
          for (Eigen::Index n = 0; n < span; ++n)
            shift_gap.update(std::abs(moved_oracle.distances(n) - oracle.distances(n)), where);

          const DistanceSequence moved = run_distance_sequence(shifted);
          for (std::size_t n = 0; n < std::min(distances.size(), static_cast<std::size_t>(moved.values.size())); ++n)
            recurrence_shift_gap.update(
                std::abs(moved.values(static_cast<Eigen::Index>(n)) - distances[n]), where);
        }

        std::mt19937_64 rng(seed * 7919 + static_cast<std::uint64_t>(dimension));
        const int half_width = 12;
        for (int trial = 0; trial < 4; ++trial) {
          const Field<double> f = random_field(dimension, half_width, half_width - 1, rng);
          const Field<double> g = random_field(dimension, half_width, half_width - 1, rng);
          const double lhs = inner_product(apply_hamiltonian(f, spec, 0), g);
          const double rhs = inner_product(f, apply_hamiltonian(g, spec, 0));
          self_adjoint.update(std::abs(lhs - rhs) / std::max(1.0, f.norm() * g.norm()), where);
        }

        const PotentialSampler sampler(spec, 0);
        for (int i = -50; i <= 50; ++i) {
          const std::uint64_t key = sampler.row_key(i);
          for (int j = -50; j <= 50; ++j)
            potential_range.update(std::max(0.0, std::abs(sampler.value(key, j)) - c), where);
        }
      }
    }
  }

  ValidationReport report;
  report.checks.push_back(make_check("oracle_equivalence", oracle_gap, 1e-8));
  report.checks.push_back(make_check("local_orthogonality", local_drift, 1e-10));
  report.checks.push_back(make_check("basis_orthonormality", orthonormality, 1e-8));
  report.checks.push_back(make_check("three_term_sufficiency", three_term, 1e-8));
  report.checks.push_back(make_check("distance_identity", identity, 1e-12));
  report.checks.push_back(make_check("monotone_distances", monotone, 1e-12));
  report.checks.push_back(make_check("shift_invariance", shift_gap, 1e-10));
  // Finite-precision Lanczos error is itself bounded only by the oracle
  // tolerance, so the recurrence-path gap is reported without gating.
  CheckResult recurrence_shift = make_check("shift_invariance_recurrence", recurrence_shift_gap, 1e-10);
  recurrence_shift.advisory = true;
  report.checks.push_back(recurrence_shift);
  report.checks.push_back(make_check("self_adjointness", self_adjoint, 1e-12));
  report.checks.push_back(make_check("potential_range", potential_range, 0.0));
  return report;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed || c.advisory; });
}

const CheckResult* ValidationReport::find(std::string_view name) const {
  for (const CheckResult& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::string out;
  char line[256];
  for (const CheckResult& c : checks) {
    std::snprintf(line, sizeof line, "%-4s %-28s worst=%.3e tol=%.1e  %s\n",
                  c.passed ? "PASS" : (c.advisory ? "WARN" : "FAIL"), c.name.c_str(), c.worst, c.tolerance,
                  c.detail.c_str());
    out += line;
  }
  out += passed() ? "validation passed\n" : "validation FAILED\n";
  return out;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const CheckResult& c : checks)
    checks_json.push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"advisory", c.advisory},
                           {"worst", c.worst},
                           {"tolerance", c.tolerance},
                           {"where", c.detail}});
  return {{"passed", passed()}, {"checks", checks_json}};
}

}  // namespace anderson
