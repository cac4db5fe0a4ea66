#ifndef ANDERSON_KRYLOV_HPP
#define ANDERSON_KRYLOV_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "anderson/errors.hpp"
#include "anderson/lattice.hpp"

namespace anderson {

enum class Reorthogonalization { Off, Full };

/// ThreeTerm is the Lanczos recurrence. DropPrevious omits the m_{n-1}
/// correction and exists only so validation can prove it detects the fault.
enum class Recurrence { ThreeTerm, DropPrevious };

struct RunConfig {
  DisorderSpec spec;
  std::size_t n_max = 0;
  SiteIndex source = SiteIndex(0, 0);
  SiteIndex target = SiteIndex(1, 1);
  Reorthogonalization reorthogonalize = Reorthogonalization::Off;
  /// Adds s * Identity to the operator; Krylov spans do not depend on s.
  double diagonal_shift = 0.0;
  double breakdown_tolerance = 1e-13;
  Recurrence recurrence = Recurrence::ThreeTerm;

  /// Origin source, target (1,1) in 2D and (1) in 1D.
  static RunConfig standard(const DisorderSpec& spec, std::size_t n_max) {
    RunConfig config;
    config.spec = spec;
    config.n_max = n_max;
    config.source = SiteIndex::origin(spec.dimension);
    config.target = spec.dimension == 1 ? SiteIndex(1) : SiteIndex(1, 1);
    return config;
  }

  /// Large enough that support never reaches the edge within n_max steps.
  int half_width() const { return static_cast<int>(n_max) + 2 + source.l1_norm(); }

  void validate() const {
    spec.validate();
    if (source.dimension() != spec.dimension || target.dimension() != spec.dimension)
      throw std::invalid_argument("source and target sites must match the lattice dimension");
    if (source == target) throw std::invalid_argument("source and target sites must differ");
    const int limit = static_cast<int>(n_max) + 2;
    if (source.l1_norm() > limit || target.l1_norm() > limit)
      throw std::invalid_argument("source and target must lie within l1 distance n_max + 2");
    if (!(breakdown_tolerance >= 0.0)) throw std::invalid_argument("breakdown tolerance must be >= 0");
  }
};

/// alpha_n = <H m_n, m_n>, beta_n = |m~_{n+1}|, gamma_n = <H m_n, m_{n-1}>.
struct LanczosCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Loss-of-orthogonality diagnostics for m_{n+1}.
struct OrthogonalityDrift {
  double with_previous = 0.0;  // <m_{n+1}, m_{n-1}>
  double with_current = 0.0;   // <m_{n+1}, m_n>
};

template <typename Scalar = double>
struct KrylovState {
  Field<Scalar> m_prev;
  Field<Scalar> m_curr;
  std::size_t n = 0;
  double target_entry = 0.0;  // x_n, the target-site amplitude of m_n
  double target_overlap_sq_sum = 0.0;
  double distance_sq = 1.0;
  std::vector<LanczosCoefficients> diag_history;
  std::vector<OrthogonalityDrift> drift;
  /// Work vector for the next step; not part of the basis.
  Field<Scalar> scratch = Field<Scalar>(1, 0);

  double distance() const { return std::sqrt(std::max(distance_sq, 0.0)); }
};

template <typename Scalar = double>
KrylovState<Scalar> init_state(const RunConfig& config) {
  config.validate();
  const int half_width = config.half_width();
  KrylovState<Scalar> state{.m_prev = Field<Scalar>(config.spec.dimension, half_width),
                            .m_curr = delta_field<Scalar>(config.source, half_width),
                            .diag_history = {},
                            .drift = {},
                            .scratch = Field<Scalar>(config.spec.dimension, half_width)};
  state.target_entry = static_cast<double>(state.m_curr(config.target));
  state.target_overlap_sq_sum = state.target_entry * state.target_entry;
  state.distance_sq = 1.0 - state.target_overlap_sq_sum;
  state.diag_history.reserve(config.n_max);
  state.drift.reserve(config.n_max);
  return state;
}

namespace detail {

template <bool TwoD, bool Disordered, typename Scalar>
inline double stencil(const PotentialSampler& sampler, std::uint64_t key, double on_site,
                      const Scalar* m, const Scalar* up, const Scalar* down, int j) {
  double diagonal = on_site;
  if constexpr (Disordered) diagonal += sampler.value(key, j);
  double value = diagonal * static_cast<double>(m[j]) - static_cast<double>(m[j - 1]) -
                 static_cast<double>(m[j + 1]);
  if constexpr (TwoD) value -= static_cast<double>(up[j]) + static_cast<double>(down[j]);
  return value;
}

// One Lanczos step into the scratch field, which then becomes m_{n+1}.
//
// pass 1: scratch = H m_n over radius r + 1; alpha and gamma on the way
// pass 2: scratch -= gamma m_{n-1} + alpha m_n; |m~|^2 and drift overlaps
// pass 3: normalisation, then rotate (prev, curr, scratch) <- (curr, scratch, prev)
template <bool TwoD, bool Disordered, typename Scalar>
void lanczos_step(KrylovState<Scalar>& state, const RunConfig& config) {
  const Field<Scalar>& prev = state.m_prev;
  const Field<Scalar>& curr = state.m_curr;
  Field<Scalar>& next = state.scratch;
  const int radius = std::max(curr.radius_bound(), prev.radius_bound());
  const int grown = radius + 1;
  if (grown > curr.half_width())
    throw WindowOverflow("Krylov vector support would reach radius " + std::to_string(grown) +
                         " beyond window half width " + std::to_string(curr.half_width()));

  const std::size_t step = state.n;
  const PotentialSampler sampler(config.spec, step);
  const double on_site = 2.0 * config.spec.dimension + config.diagonal_shift;
  const int row_reach = TwoD ? grown : 0;

  // The scratch field may hold an older vector of radius <= r - 2, which the
  // grown diamond covers entirely.
  double alpha = 0.0;
  double gamma = 0.0;
  for (int i = -row_reach; i <= row_reach; ++i) {
    const int reach = grown - std::abs(i);
    const std::uint64_t key = Disordered ? sampler.row_key(i) : 0;
    const Scalar* m = curr.row_ptr(i);
    const Scalar* up = TwoD ? curr.row_ptr(i - 1) : nullptr;
    const Scalar* down = TwoD ? curr.row_ptr(i + 1) : nullptr;
    const Scalar* p = prev.row_ptr(i);
    Scalar* h = next.row_ptr(i);
    for (int j = -reach; j <= reach; ++j) {
      const double hm = stencil<TwoD, Disordered>(sampler, key, on_site, m, up, down, j);
      alpha += hm * static_cast<double>(m[j]);
      gamma += hm * static_cast<double>(p[j]);
      h[j] = static_cast<Scalar>(hm);
    }
  }

  const double prev_weight = config.recurrence == Recurrence::ThreeTerm ? gamma : 0.0;
  double norm_sq = 0.0;
  double overlap_prev = 0.0;
  double overlap_curr = 0.0;
  for (int i = -row_reach; i <= row_reach; ++i) {
    const int reach = grown - std::abs(i);
    const Scalar* m = curr.row_ptr(i);
    const Scalar* p = prev.row_ptr(i);
    Scalar* w = next.row_ptr(i);
    for (int j = -reach; j <= reach; ++j) {
      const double pj = static_cast<double>(p[j]);
      const double mj = static_cast<double>(m[j]);
      const Scalar value = static_cast<Scalar>(static_cast<double>(w[j]) - prev_weight * pj - alpha * mj);
      const double wd = static_cast<double>(value);
      norm_sq += wd * wd;
      overlap_prev += wd * pj;
      overlap_curr += wd * mj;
      w[j] = value;
    }
  }

  const double beta = std::sqrt(norm_sq);
  if (!std::isfinite(beta))
    throw std::domain_error("non-finite Krylov residual at step " + std::to_string(step + 1));
  if (beta < config.breakdown_tolerance) throw KrylovBreakdown(step + 1, beta);

  const Scalar scale = static_cast<Scalar>(1.0 / beta);
  for (int i = -row_reach; i <= row_reach; ++i) {
    const int reach = grown - std::abs(i);
    Scalar* w = next.row_ptr(i);
    for (int j = -reach; j <= reach; ++j) w[j] *= scale;
  }
  next.set_radius_bound(grown);

  std::swap(state.m_prev, state.m_curr);
  std::swap(state.m_curr, state.scratch);
  state.diag_history.push_back({alpha, beta, gamma});
  state.drift.push_back({overlap_prev / beta, overlap_curr / beta});
}

}  // namespace detail

/// Extends the orthonormal Krylov basis by one vector and updates the
/// distance from the target site to its span.
template <typename Scalar>
void advance(KrylovState<Scalar>& state, const RunConfig& config) {
  if (state.n + 1 > config.n_max)
    throw std::invalid_argument("advance beyond n_max = " + std::to_string(config.n_max));
  if (state.m_curr.dimension() != config.spec.dimension)
    throw ShapeMismatch("Krylov state and run configuration disagree on dimension");

  const bool two_d = config.spec.dimension == 2;
  const bool disordered = config.spec.disorder != 0.0;
  if (two_d && disordered) detail::lanczos_step<true, true>(state, config);
  else if (two_d) detail::lanczos_step<true, false>(state, config);
  else if (disordered) detail::lanczos_step<false, true>(state, config);
  else detail::lanczos_step<false, false>(state, config);

  ++state.n;
  state.target_entry = static_cast<double>(state.m_curr(config.target));
  state.target_overlap_sq_sum += state.target_entry * state.target_entry;
  state.distance_sq = 1.0 - state.target_overlap_sq_sum;
}

template <typename Scalar = double>
struct KrylovRun {
  KrylovState<Scalar> state;
  bool broke_down = false;
  std::size_t breakdown_step = 0;
  double breakdown_residual = 0.0;
};

/// Drives the recurrence to n_max, calling observe(state) for n = 0, 1, ...
/// A breakdown ends the run early and is reported, not thrown.
template <typename Scalar = double, typename Observer>
KrylovRun<Scalar> run_krylov(const RunConfig& config, Observer&& observe) {
  KrylovRun<Scalar> run{init_state<Scalar>(config)};
  observe(static_cast<const KrylovState<Scalar>&>(run.state));
  while (run.state.n < config.n_max) {
    try {
      advance(run.state, config);
    } catch (const KrylovBreakdown& e) {
      run.broke_down = true;
      run.breakdown_step = e.step();
      run.breakdown_residual = e.residual_norm();
      break;
    }
    observe(static_cast<const KrylovState<Scalar>&>(run.state));
  }
  return run;
}

struct DistanceSequence {
  Eigen::VectorXd values;  // D^0 ... D^n
  bool broke_down = false;
  std::size_t breakdown_step = 0;
};

struct OracleResult {
  Eigen::VectorXd distances;
  /// Columns are the flattened orthonormal vectors m_0 ... m_n.
  Eigen::MatrixXd basis;
  /// coefficients(l, n) = <H m_n, m_l> before orthogonalisation, l <= n.
  Eigen::MatrixXd coefficients;
  bool broke_down = false;
};

inline constexpr std::size_t kOracleMaxSteps = 64;

namespace detail {

inline Eigen::VectorXd flatten(const Field<double>& f) {
  const auto window = f.window();
  Eigen::VectorXd v(window.size());
  Eigen::Map<Field<double>::Grid>(v.data(), window.rows(), window.cols()) = window;
  return v;
}

inline Field<double> unflatten(const Eigen::VectorXd& v, int dimension, int half_width) {
  Field<double> f(dimension, half_width);
  auto window = f.window();
  window = Eigen::Map<const Field<double>::Grid>(v.data(), window.rows(), window.cols());
  f.set_radius_bound(half_width);
  f.set_radius_bound(f.support_radius());
  return f;
}

}  // namespace detail

/// Distance sequence by the unoptimised route: every Krylov vector is kept,
/// H m_n is orthogonalised against all of them (twice, modified
/// Gram-Schmidt) and the distance is the norm of the explicit residual
/// e_n = delta_target - P_n delta_target.
inline OracleResult oracle_distance_sequence(const RunConfig& config) {
  config.validate();
  if (config.n_max > kOracleMaxSteps)
    throw std::invalid_argument("oracle path is limited to n_max <= " +
                                std::to_string(kOracleMaxSteps));
  const int dimension = config.spec.dimension;
  const int half_width = config.half_width();
  const auto n_max = static_cast<Eigen::Index>(config.n_max);

  const Eigen::VectorXd target = detail::flatten(delta_field<double>(config.target, half_width));
  const Eigen::VectorXd source = detail::flatten(delta_field<double>(config.source, half_width));

  OracleResult result;
  result.basis = Eigen::MatrixXd::Zero(source.size(), n_max + 1);
  result.coefficients = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  result.basis.col(0) = source;

  std::vector<double> distances;
  auto residual_norm = [&](Eigen::Index columns) {
    const auto q = result.basis.leftCols(columns);
    const Eigen::VectorXd e = target - q * (q.transpose() * target);
    return e.norm();
  };
  distances.push_back(residual_norm(1));

  for (Eigen::Index n = 0; n < n_max; ++n) {
    const Field<double> m = detail::unflatten(result.basis.col(n), dimension, half_width);
    Eigen::VectorXd v = detail::flatten(apply_hamiltonian(
        m, config.spec, static_cast<std::size_t>(n), config.diagonal_shift));
    result.coefficients.col(n).head(n + 1) = result.basis.leftCols(n + 1).transpose() * v;
    for (int sweep = 0; sweep < 2; ++sweep)
      for (Eigen::Index l = 0; l <= n; ++l) v -= result.basis.col(l).dot(v) * result.basis.col(l);
    const double beta = v.norm();
    if (beta < config.breakdown_tolerance) {
      result.broke_down = true;
      break;
    }
    result.basis.col(n + 1) = v / beta;
    distances.push_back(residual_norm(n + 2));
  }
  result.distances = Eigen::Map<const Eigen::VectorXd>(distances.data(),
                                                       static_cast<Eigen::Index>(distances.size()));
  return result;
}

/// D^0 ... D^{n_max}. With reorthogonalize = Full the oracle path is used.
template <typename Scalar = double>
DistanceSequence run_distance_sequence(const RunConfig& config) {
  DistanceSequence out;
  if (config.reorthogonalize == Reorthogonalization::Full) {
    OracleResult oracle = oracle_distance_sequence(config);
    out.values = std::move(oracle.distances);
    out.broke_down = oracle.broke_down;
    if (out.broke_down) out.breakdown_step = static_cast<std::size_t>(out.values.size());
    return out;
  }
  std::vector<double> distances;
  distances.reserve(config.n_max + 1);
  const auto run = run_krylov<Scalar>(
      config, [&](const KrylovState<Scalar>& s) { distances.push_back(s.distance()); });
  out.values = Eigen::Map<const Eigen::VectorXd>(distances.data(),
                                                 static_cast<Eigen::Index>(distances.size()));
  out.broke_down = run.broke_down;
  out.breakdown_step = run.breakdown_step;
  return out;
}

}  // namespace anderson

#endif  // ANDERSON_KRYLOV_HPP
