// Plain-double counterparts of the tape primitives, so generic code can be
// written once as `ad::tanh(x)`, `ad::smooth_max(v, tau)` and instantiated
// for `double` (forward only) or `ad::Var` (recorded).
#pragma once

#include <cmath>
#include <span>
#include <type_traits>

#include "stlgail/ad/tape.hpp"

namespace stlgail::ad {

inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double sigmoid(double x) {
  // split to avoid overflow of exp for large |x|
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double value_of(double v) noexcept { return v; }

double affine(std::span<const double> w, std::span<const double> x, double bias);
double sum(std::span<const double> values);
double smooth_max(std::span<const double> values, double tau);
double smooth_min(std::span<const double> values, double tau);

/// Softmax weights of `values / tau` and the weighted average, shared by the
/// double and Var implementations. `weights` must have values.size() slots.
double softmax_average(std::span<const double> values, double tau,
                       std::span<double> weights);

template <class T>
inline constexpr bool is_var_v = std::is_same_v<std::remove_cvref_t<T>, Var>;

}  // namespace stlgail::ad
