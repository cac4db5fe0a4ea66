#ifndef ANDERSON_LATTICE_HPP
#define ANDERSON_LATTICE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anderson/errors.hpp"

namespace anderson {

/// A point of Z^d, d in {1, 2}. In 2D the first coordinate selects the
/// storage row and the second the column; a 1D site lives on row 0.
class SiteIndex {
 public:
  explicit SiteIndex(int x) : dimension_(1), coords_{x, 0} {}
  SiteIndex(int x, int y) : dimension_(2), coords_{x, y} {}

  static SiteIndex origin(int dimension) {
    return dimension == 1 ? SiteIndex(0) : SiteIndex(0, 0);
  }

  int dimension() const { return dimension_; }
  int operator[](int axis) const { return coords_[static_cast<std::size_t>(axis)]; }

  int l1_norm() const {
    return std::abs(coords_[0]) + (dimension_ == 2 ? std::abs(coords_[1]) : 0);
  }

  int row() const { return dimension_ == 2 ? coords_[0] : 0; }
  int col() const { return dimension_ == 2 ? coords_[1] : coords_[0]; }

  std::string to_string() const {
    if (dimension_ == 1) return "(" + std::to_string(coords_[0]) + ")";
    return "(" + std::to_string(coords_[0]) + "," + std::to_string(coords_[1]) + ")";
  }

  friend bool operator==(const SiteIndex&, const SiteIndex&) = default;

 private:
  int dimension_;
  std::array<int, 2> coords_;
};

enum class PotentialMode { FixedRealization, FreshPerStep };

/// Parameters of the i.i.d. uniform potential on [-disorder, disorder].
struct DisorderSpec {
  int dimension = 2;
  double disorder = 0.0;
  std::uint64_t seed = 0;
  PotentialMode mode = PotentialMode::FixedRealization;

  void validate() const {
    if (dimension != 1 && dimension != 2)
      throw std::invalid_argument("dimension must be 1 or 2");
    if (!(disorder >= 0.0) || !std::isfinite(disorder))
      throw std::invalid_argument("disorder must be a finite nonnegative number");
  }
};

namespace detail {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t encode(int v) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(v));
}

}  // namespace detail

/// Counter-based sampler of the potential for one application of the
/// operator. The value at a site is a pure function of
/// (seed, row, col, step); in FixedRealization mode the step is ignored.
class PotentialSampler {
 public:
  PotentialSampler(const DisorderSpec& spec, std::size_t step)
      : disorder_(spec.disorder) {
    const std::uint64_t effective_step =
        spec.mode == PotentialMode::FreshPerStep ? static_cast<std::uint64_t>(step) : 0;
    const std::uint64_t seed_key = detail::mix64(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    step_key_ = detail::mix64(seed_key + (effective_step + 1) * 0xd1b54a32d192ed03ULL);
  }

  bool vanishes() const { return disorder_ == 0.0; }

  std::uint64_t row_key(int row) const {
    return detail::mix64(step_key_ + detail::encode(row) * 0x8cb92ba72f3d8dd7ULL);
  }

  double value(std::uint64_t row_key, int col) const {
    if (disorder_ == 0.0) return 0.0;
    const std::uint64_t bits =
        detail::mix64(row_key + detail::encode(col) * 0x9e3779b97f4a7c15ULL);
    // 2 * bits * 2^-64 - 1 == (bits - 2^63) * 2^-63, converted through a
    // signed integer so it is a single exact-then-rounded conversion.
    const auto centred = static_cast<std::int64_t>(bits ^ 0x8000000000000000ULL);
    return disorder_ * (static_cast<double>(centred) * 0x1p-63);
  }

  double operator()(const SiteIndex& site) const {
    return value(row_key(site.row()), site.col());
  }

 private:
  double disorder_;
  std::uint64_t step_key_ = 0;
};

inline double potential_at(const DisorderSpec& spec, const SiteIndex& site, std::size_t step) {
  return PotentialSampler(spec, step)(site);
}

/// Finitely supported real amplitudes on the l1-ball of radius
/// `half_width` around the origin.
///
/// Storage is a dense row-major box of side 2W+1 plus a one-site zero halo,
/// so stencil reads one step past the window stay in bounds. Writes are
/// confined to the diamond |x|_1 <= W. The field tracks an upper bound on
/// its support radius which kernels use to restrict work.
template <typename Scalar = double>
class Field {
 public:
  using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using WindowMap = Eigen::Map<Grid, Eigen::Unaligned, Eigen::OuterStride<>>;
  using ConstWindowMap = Eigen::Map<const Grid, Eigen::Unaligned, Eigen::OuterStride<>>;

  Field(int dimension, int half_width)
      : dimension_(dimension), half_width_(half_width) {
    if (dimension != 1 && dimension != 2)
      throw std::invalid_argument("dimension must be 1 or 2");
    if (half_width < 0) throw std::invalid_argument("half_width must be nonnegative");
    stride_ = 2 * static_cast<std::size_t>(half_width) + 3;
    rows_ = dimension == 2 ? stride_ : 1;
    data_.assign(rows_ * stride_, Scalar(0));
  }

  int dimension() const { return dimension_; }
  int half_width() const { return half_width_; }
  int radius_bound() const { return radius_bound_; }

  /// Kernels that write through row pointers declare the new bound here.
  void set_radius_bound(int radius) {
    if (radius > half_width_)
      throw WindowOverflow("support radius " + std::to_string(radius) +
                           " exceeds window half width " + std::to_string(half_width_));
    radius_bound_ = std::max(radius, 0);
  }

  /// Smallest l1 radius containing every nonzero amplitude (0 for the zero field).
  int support_radius() const {
    int radius = 0;
    for_each_site(radius_bound_, [&](int i, int j) {
      if (row_ptr(i)[j] != Scalar(0)) radius = std::max(radius, std::abs(i) + std::abs(j));
    });
    return radius;
  }

  bool in_window(const SiteIndex& site) const {
    return site.dimension() == dimension_ && site.l1_norm() <= half_width_;
  }

  Scalar operator()(const SiteIndex& site) const {
    check_dimension(site);
    if (site.l1_norm() > half_width_) return Scalar(0);
    return row_ptr(site.row())[site.col()];
  }

  void set(const SiteIndex& site, Scalar value) {
    check_dimension(site);
    if (site.l1_norm() > half_width_)
      throw WindowOverflow("site " + site.to_string() + " lies outside window of half width " +
                           std::to_string(half_width_));
    if (!std::isfinite(static_cast<double>(value)))
      throw std::invalid_argument("field amplitudes must be finite");
    row_ptr(site.row())[site.col()] = value;
    if (value != Scalar(0)) radius_bound_ = std::max(radius_bound_, site.l1_norm());
  }

  void set_zero() {
    std::fill(data_.begin(), data_.end(), Scalar(0));
    radius_bound_ = 0;
  }

  /// Pointer p with p[j] the amplitude at (row, j), valid for |j| <= W + 1.
  Scalar* row_ptr(int row) {
    return data_.data() + row_offset(row) + static_cast<std::size_t>(half_width_) + 1;
  }
  const Scalar* row_ptr(int row) const {
    return data_.data() + row_offset(row) + static_cast<std::size_t>(half_width_) + 1;
  }

  /// The (2W+1)^d box without the halo, as an Eigen array view. Writing
  /// through the mutable view bypasses the window checks; callers must keep
  /// the corners beyond |x|_1 = W zero and call set_radius_bound().
  WindowMap window() {
    const Eigen::Index rows = dimension_ == 2 ? 2 * half_width_ + 1 : 1;
    return WindowMap(row_ptr(dimension_ == 2 ? -half_width_ : 0) - half_width_, rows,
                     2 * half_width_ + 1, Eigen::OuterStride<>(static_cast<Eigen::Index>(stride_)));
  }

  ConstWindowMap window() const {
    const Eigen::Index rows = dimension_ == 2 ? 2 * half_width_ + 1 : 1;
    return ConstWindowMap(row_ptr(dimension_ == 2 ? -half_width_ : 0) - half_width_, rows,
                          2 * half_width_ + 1,
                          Eigen::OuterStride<>(static_cast<Eigen::Index>(stride_)));
  }

  double squared_norm() const {
    double sum = 0.0;
    for_each_row_segment(radius_bound_, [&](const Scalar* p, int lo, int hi) {
      for (int j = lo; j <= hi; ++j) sum += static_cast<double>(p[j]) * static_cast<double>(p[j]);
    });
    return sum;
  }
  double norm() const { return std::sqrt(squared_norm()); }

  /// Calls fn(i, j) for every site of the diamond of the given radius
  /// (clamped to the window), rows in increasing order.
  template <typename Fn>
  void for_each_site(int radius, Fn&& fn) const {
    radius = std::min(radius, half_width_);
    const int row_radius = dimension_ == 2 ? radius : 0;
    for (int i = -row_radius; i <= row_radius; ++i) {
      const int reach = radius - std::abs(i);
      for (int j = -reach; j <= reach; ++j) fn(i, j);
    }
  }

  /// Calls fn(row_pointer, lo, hi) for each row of the diamond of the given
  /// radius, where lo..hi is the column range of the diamond on that row.
  template <typename Fn>
  void for_each_row_segment(int radius, Fn&& fn) const {
    radius = std::min(radius, half_width_);
    const int row_radius = dimension_ == 2 ? radius : 0;
    for (int i = -row_radius; i <= row_radius; ++i) {
      const int reach = radius - std::abs(i);
      fn(row_ptr(i), -reach, reach);
    }
  }

  Field& operator+=(const Field& other) {
    check_same_window(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    radius_bound_ = std::max(radius_bound_, other.radius_bound_);
    return *this;
  }

  Field& operator-=(const Field& other) {
    check_same_window(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    radius_bound_ = std::max(radius_bound_, other.radius_bound_);
    return *this;
  }

  Field& operator*=(Scalar factor) {
    for (auto& v : data_) v *= factor;
    return *this;
  }

  void check_same_window(const Field& other) const {
    if (other.dimension_ != dimension_ || other.half_width_ != half_width_)
      throw ShapeMismatch("fields live on different windows (d=" + std::to_string(dimension_) +
                          ", W=" + std::to_string(half_width_) + " vs d=" +
                          std::to_string(other.dimension_) +
                          ", W=" + std::to_string(other.half_width_) + ")");
  }

 private:
  std::size_t row_offset(int row) const {
    const std::ptrdiff_t origin_row = dimension_ == 2 ? half_width_ + 1 : 0;
    return static_cast<std::size_t>(origin_row + row) * stride_;
  }

  void check_dimension(const SiteIndex& site) const {
    if (site.dimension() != dimension_)
      throw ShapeMismatch("site " + site.to_string() + " does not match field dimension " +
                          std::to_string(dimension_));
  }

  int dimension_;
  int half_width_;
  int radius_bound_ = 0;
  std::size_t stride_ = 0;
  std::size_t rows_ = 0;
  std::vector<Scalar> data_;
};

template <typename Scalar>
Field<Scalar> operator+(Field<Scalar> lhs, const Field<Scalar>& rhs) {
  lhs += rhs;
  return lhs;
}

template <typename Scalar>
Field<Scalar> operator-(Field<Scalar> lhs, const Field<Scalar>& rhs) {
  lhs -= rhs;
  return lhs;
}

template <typename Scalar>
Field<Scalar> operator*(Scalar factor, Field<Scalar> f) {
  f *= factor;
  return f;
}

template <typename Scalar = double>
Field<Scalar> delta_field(const SiteIndex& site, int half_width) {
  if (site.l1_norm() > half_width)
    throw WindowOverflow("delta site " + site.to_string() + " lies outside window of half width " +
                         std::to_string(half_width));
  Field<Scalar> f(site.dimension(), half_width);
  f.set(site, Scalar(1));
  return f;
}

/// l2 pairing, summed row by row in a fixed order.
template <typename Scalar>
double inner_product(const Field<Scalar>& f, const Field<Scalar>& g) {
  f.check_same_window(g);
  const int radius = std::min(f.radius_bound(), g.radius_bound());
  double sum = 0.0;
  const int row_radius = f.dimension() == 2 ? radius : 0;
  for (int i = -row_radius; i <= row_radius; ++i) {
    const int reach = radius - std::abs(i);
    const Scalar* a = f.row_ptr(i);
    const Scalar* b = g.row_ptr(i);
    for (int j = -reach; j <= reach; ++j)
      sum += static_cast<double>(a[j]) * static_cast<double>(b[j]);
  }
  return sum;
}

/// (Hf)(x) = (2d + diagonal_shift + w_x) f(x) - sum over nearest neighbours f(x+e).
///
/// Straight gather form over the grown diamond. The Krylov module carries its
/// own fused kernel; this one is the reference used by oracles and tests.
template <typename Scalar>
Field<Scalar> apply_hamiltonian(const Field<Scalar>& f, const DisorderSpec& spec,
                                std::size_t step, double diagonal_shift = 0.0) {
  if (spec.dimension != f.dimension())
    throw ShapeMismatch("disorder spec dimension " + std::to_string(spec.dimension) +
                        " does not match field dimension " + std::to_string(f.dimension()));
  int radius = f.radius_bound();
  if (radius + 1 > f.half_width()) radius = f.support_radius();
  if (radius + 1 > f.half_width())
    throw WindowOverflow("applying the operator grows support to " + std::to_string(radius + 1) +
                         " beyond window half width " + std::to_string(f.half_width()));

  const PotentialSampler sampler(spec, step);
  const double on_site = 2.0 * spec.dimension + diagonal_shift;
  Field<Scalar> out(f.dimension(), f.half_width());
  const int out_radius = radius + 1;
  const int row_radius = f.dimension() == 2 ? out_radius : 0;
  for (int i = -row_radius; i <= row_radius; ++i) {
    const int reach = out_radius - std::abs(i);
    const std::uint64_t key = sampler.row_key(i);
    const Scalar* centre = f.row_ptr(i);
    Scalar* target = out.row_ptr(i);
    for (int j = -reach; j <= reach; ++j) {
      double value = (on_site + sampler.value(key, j)) * static_cast<double>(centre[j]) -
                     static_cast<double>(centre[j - 1]) - static_cast<double>(centre[j + 1]);
      if (f.dimension() == 2)
        value -= static_cast<double>(f.row_ptr(i - 1)[j]) + static_cast<double>(f.row_ptr(i + 1)[j]);
      target[j] = static_cast<Scalar>(value);
    }
  }
  out.set_radius_bound(out_radius);
  return out;
}

}  // namespace anderson

#endif  // ANDERSON_LATTICE_HPP
