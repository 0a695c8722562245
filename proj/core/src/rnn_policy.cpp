#include "stlgail/policy/rnn_policy.hpp"

#include <cmath>

#include "stlgail/rng.hpp"

namespace stlgail::policy {

void ControlBox::validate() const {
  if (lower.size() != upper.size() || lower.empty()) {
    throw InvalidArgument("control box bounds must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw InvalidArgument("control box needs lower < upper");
  }
}

bool ControlBox::contains(std::span<const double> u) const noexcept {
  if (u.size() != dim()) return false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < lower[i] || u[i] > upper[i]) return false;
  }
  return true;
}

bool ControlBox::interior(std::span<const double> u) const noexcept {
  if (u.size() != dim()) return false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > lower[i] && u[i] < upper[i])) return false;
  }
  return true;
}

ad::ParamVector make_policy_params(const PolicyShape& shape) {
  if (shape.input_dim < 1 || shape.hidden < 1 || shape.control_dim < 1) {
    throw InvalidArgument("policy shape dimensions must be positive");
  }
  const auto n = static_cast<std::size_t>(shape.input_dim);
  const auto H = static_cast<std::size_t>(shape.hidden);
  const auto m = static_cast<std::size_t>(shape.control_dim);
  ad::ParamVector p;
  p.add_group("W_ih", H * n);
  p.add_group("W_hh", H * H);
  p.add_group("b_h", H);
  p.add_group("W_out", m * H);
  p.add_group("b_out", m);
  return p;
}

ad::ParamVector init_policy(const PolicyShape& shape, std::uint64_t seed) {
  auto p = make_policy_params(shape);
  Rng rng(seed);
  const double cell = 1.0 / std::sqrt(static_cast<double>(shape.input_dim + shape.hidden));
  const double head = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (double& w : p.group("W_ih")) w = rng.uniform(-cell, cell);
  for (double& w : p.group("W_hh")) w = rng.uniform(-cell, cell);
  for (double& w : p.group("W_out")) w = rng.uniform(-head, head);
  return p;
}

}  // namespace stlgail::policy
