#ifndef ANDERSON_ERRORS_HPP
#define ANDERSON_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anderson {

/// A write (or a stencil application) would leave the preallocated window.
class WindowOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two fields with different windows were combined.
class ShapeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Lanczos residual vanished: the Krylov space became invariant.
class KrylovBreakdown : public std::runtime_error {
 public:
  KrylovBreakdown(std::size_t step, double residual_norm)
      : std::runtime_error("Krylov breakdown at step " + std::to_string(step) +
                           " (residual norm " + std::to_string(residual_norm) +
                           ")"),
        step_(step),
        residual_norm_(residual_norm) {}

  std::size_t step() const { return step_; }
  double residual_norm() const { return residual_norm_; }

 private:
  std::size_t step_;
  double residual_norm_;
};

/// Least-squares fit requested on abscissae that are all equal.
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotNormalized : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace anderson

#endif  // ANDERSON_ERRORS_HPP
