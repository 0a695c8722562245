// Recurrent control policy
//
//   h'  = tanh(W_ih x + W_hh h + b_h)
//   y   = W_out h' + b_out
//   u   = lower + (upper - lower) (tanh(y) + 1) / 2
//
// so every control lies strictly inside the box.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stlgail/ad/param_vector.hpp"
#include "stlgail/ad/scalar.hpp"
#include "stlgail/ad/tape.hpp"
#include "stlgail/error.hpp"

namespace stlgail::policy {

struct ControlBox {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return lower.size(); }
  /// Throws InvalidArgument unless lower < upper componentwise.
  void validate() const;
  bool contains(std::span<const double> u) const noexcept;
  bool interior(std::span<const double> u) const noexcept;

  friend bool operator==(const ControlBox&, const ControlBox&) = default;
};

struct PolicyShape {
  int input_dim = 4;
  int hidden = 32;
  int control_dim = 2;

  friend bool operator==(const PolicyShape&, const PolicyShape&) = default;
};

/// Zero parameters with groups W_ih, W_hh, b_h, W_out, b_out.
ad::ParamVector make_policy_params(const PolicyShape& shape);

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero. The
/// recurrent cell's fan-in is input_dim + hidden.
ad::ParamVector init_policy(const PolicyShape& shape, std::uint64_t seed);

/// One step of the cell. `u` and `h_next` are outputs.
template <class T>
void policy_step(const PolicyShape& shape, std::span<const T> theta, std::span<const T> x,
                 std::span<const T> h, const ControlBox& box, std::span<T> u,
                 std::span<T> h_next) {
  const auto n = static_cast<std::size_t>(shape.input_dim);
  const auto H = static_cast<std::size_t>(shape.hidden);
  const auto m = static_cast<std::size_t>(shape.control_dim);
  if (x.size() != n || h.size() != H || h_next.size() != H || u.size() != m ||
      box.dim() != m) {
    throw DimensionMismatch("policy_step: dimension mismatch");
  }
  if (theta.size() != H * n + H * H + H + m * H + m) {
    throw DimensionMismatch("policy_step: parameter vector has wrong length");
  }
  const T* w_ih = theta.data();
  const T* w_hh = w_ih + H * n;
  const T* b_h = w_hh + H * H;
  const T* w_out = b_h + H;
  const T* b_out = w_out + m * H;
  for (std::size_t i = 0; i < H; ++i) {
    const T pre = ad::affine(std::span<const T>(w_ih + i * n, n), x, b_h[i]);
    h_next[i] = ad::tanh(ad::affine(std::span<const T>(w_hh + i * H, H), h, pre));
  }
  const std::span<const T> hn(h_next.data(), H);
  for (std::size_t k = 0; k < m; ++k) {
    const T y = ad::affine(std::span<const T>(w_out + k * H, H), hn, b_out[k]);
    const double width = box.upper[k] - box.lower[k];
    u[k] = T(box.lower[k]) + T(0.5 * width) * (ad::tanh(y) + T(1.0));
  }
}

}  // namespace stlgail::policy
