#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stlgail::ad {

struct FiniteDiffReport {
  /// max_i |analytic_i - central_i| / max(1, |central_i|) over checked
  /// coordinates.
  double max_relative_error = 0.0;
  /// Coordinates skipped as non-differentiable: the one-sided differences
  /// disagree by more than `kink_tolerance`.
  std::vector<std::size_t> skipped;
  std::vector<double> central;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Compares `analytic` against central differences of `f` at `theta` with
/// step `h`. Throws NonFiniteValue if `f` returns NaN or infinity.
FiniteDiffReport finite_diff_check(const ScalarFunction& f,
                                   std::span<const double> theta,
                                   std::span<const double> analytic, double h,
                                   double kink_tolerance = 1e-3);

}  // namespace stlgail::ad
