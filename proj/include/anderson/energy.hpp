#ifndef ANDERSON_ENERGY_HPP
#define ANDERSON_ENERGY_HPP

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <string>

#include <Eigen/Dense>

#include "anderson/errors.hpp"
#include "anderson/krylov.hpp"
#include "anderson/lattice.hpp"

namespace anderson {

/// Shell ("diamond") amplitudes E(l) = sqrt(sum_{|x|_1 = l} f(x)^2) of a
/// Krylov vector, l = 0 .. half_width.
struct EnergyProfile {
  std::size_t step = 0;
  Eigen::VectorXd values;
};

/// Squared amplitude mass on each l1 shell, no normalisation requirement.
template <typename Scalar>
Eigen::VectorXd shell_masses(const Field<Scalar>& f) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(f.half_width() + 1);
  f.for_each_site(f.radius_bound(), [&](int i, int j) {
    const double v = static_cast<double>(f.row_ptr(i)[j]);
    mass(std::abs(i) + std::abs(j)) += v * v;
  });
  return mass;
}

template <typename Scalar>
EnergyProfile energy_profile(const Field<Scalar>& f, std::size_t step = 0) {
  const double norm = f.norm();
  if (std::abs(norm - 1.0) > 1e-6)
    throw NotNormalized("energy profile needs a unit vector, got norm " + std::to_string(norm));
  return {step, shell_masses(f).cwiseSqrt()};
}

/// <l> = sum_l l E(l)^2, the mean l1 distance of the energy from the origin.
inline double shell_center(const Eigen::Ref<const Eigen::VectorXd>& profile) {
  const Eigen::VectorXd l = Eigen::VectorXd::LinSpaced(profile.size(), 0.0,
                                                       static_cast<double>(profile.size() - 1));
  return l.dot(profile.cwiseAbs2());
}

/// Row k holds E(., k) for the Krylov vector m_k, k = 0 .. n_max. Rows past a
/// breakdown stay zero.
template <typename Scalar = double>
Eigen::MatrixXd energy_evolution(const RunConfig& config, std::size_t n_max) {
  RunConfig limited = config;
  limited.n_max = n_max;
  Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_max) + 1,
                                                 limited.half_width() + 1);
  run_krylov<Scalar>(limited, [&](const KrylovState<Scalar>& s) {
    energy.row(static_cast<Eigen::Index>(s.n)) = energy_profile(s.m_curr, s.n).values.transpose();
  });
  return energy;
}

/// Same layout as energy_evolution but for the normalised power iterates
/// H^k delta_source / |H^k delta_source|.
inline Eigen::MatrixXd power_energy_evolution(const RunConfig& config, std::size_t n_max) {
  RunConfig limited = config;
  limited.n_max = n_max;
  limited.validate();
  const int half_width = limited.half_width();
  Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_max) + 1,
                                                 half_width + 1);
  Field<double> iterate = delta_field<double>(limited.source, half_width);
  for (std::size_t k = 0;; ++k) {
    energy.row(static_cast<Eigen::Index>(k)) = energy_profile(iterate, k).values.transpose();
    if (k == n_max) break;
    iterate = apply_hamiltonian(iterate, limited.spec, k, limited.diagonal_shift);
    iterate *= 1.0 / iterate.norm();
  }
  return energy;
}

}  // namespace anderson

#endif  // ANDERSON_ENERGY_HPP
