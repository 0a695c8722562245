#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stlgail/ad/finite_diff.hpp"
#include "stlgail/error.hpp"
#include "stlgail/policy/rnn_policy.hpp"
#include "stlgail/rng.hpp"

using namespace stlgail;
using policy::ControlBox;
using policy::PolicyShape;

namespace {

const ControlBox kBox{{0.0, -1.0}, {1.0, 1.0}};

}  // namespace

TEST(ControlBox, Validation) {
  EXPECT_NO_THROW(kBox.validate());
  EXPECT_THROW((ControlBox{{0.0}, {0.0}}).validate(), InvalidArgument);
  EXPECT_THROW((ControlBox{{0.0, 1.0}, {1.0}}).validate(), InvalidArgument);
  EXPECT_TRUE(kBox.contains(std::vector<double>{1.0, -1.0}));
  EXPECT_FALSE(kBox.interior(std::vector<double>{1.0, 0.0}));
  EXPECT_TRUE(kBox.interior(std::vector<double>{0.5, 0.0}));
}

TEST(Policy, ParameterGroups) {
  const PolicyShape s{4, 8, 2};
  const auto p = policy::make_policy_params(s);
  EXPECT_EQ(p.size(), 8u * 4 + 8 * 8 + 8 + 2 * 8 + 2);
  EXPECT_EQ(p.groups().front().name, "W_ih");
  EXPECT_EQ(p.groups().back().name, "b_out");
  EXPECT_THROW(policy::make_policy_params({0, 8, 2}), InvalidArgument);
}

TEST(Policy, InitRangeAndDeterminism) {
  const PolicyShape s{4, 8, 2};
  const auto p = policy::init_policy(s, 3);
  EXPECT_EQ(p, policy::init_policy(s, 3));
  EXPECT_NE(p, policy::init_policy(s, 4));
  const double bound = 1.0 / std::sqrt(12.0);
  for (double w : p.group("W_hh")) EXPECT_LE(std::abs(w), bound);
  for (double b : p.group("b_h")) EXPECT_EQ(b, 0.0);
}

TEST(Policy, ControlsStayInsideTheBox) {
  const PolicyShape s{3, 6, 2};
  auto p = policy::init_policy(s, 1);
  for (auto& v : p.flat()) v *= 5.0;
  Rng rng(2);
  std::vector<double> h(6, 0.0);
  std::vector<double> h2(6);
  std::vector<double> u(2);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x{rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3)};
    policy::policy_step<double>(s, p.flat(), x, h, kBox, u, h2);
    EXPECT_TRUE(kBox.contains(u));
    for (double v : h2) EXPECT_LE(std::abs(v), 1.0);
    h = h2;
  }
}

TEST(Policy, ZeroParametersGiveBoxCenter) {
  const PolicyShape s{2, 3, 2};
  const auto p = policy::make_policy_params(s);
  std::vector<double> h(3, 0.0), h2(3), u(2);
  policy::policy_step<double>(s, p.flat(), std::vector<double>{1.0, 2.0}, h, kBox, u, h2);
  EXPECT_DOUBLE_EQ(u[0], 0.5);
  EXPECT_DOUBLE_EQ(u[1], 0.0);
}

TEST(Policy, DimensionChecks) {
  const PolicyShape s{2, 3, 2};
  const auto p = policy::make_policy_params(s);
  std::vector<double> h(3, 0.0), h2(3), u(2);
  EXPECT_THROW(policy::policy_step<double>(s, p.flat(), std::vector<double>{1.0}, h, kBox, u, h2),
               DimensionMismatch);
  const std::vector<double> short_theta(5);
  EXPECT_THROW(policy::policy_step<double>(s, short_theta, std::vector<double>{1.0, 2.0}, h, kBox,
                                           u, h2),
               DimensionMismatch);
}

TEST(Policy, RecurrentGradient) {
  const PolicyShape s{2, 4, 2};
  const auto p0 = policy::init_policy(s, 9);
  const std::vector<double> theta(p0.flat().begin(), p0.flat().end());
  const std::vector<std::vector<double>> inputs{{0.3, -0.2}, {1.0, 0.5}, {-0.7, 0.1}};
  auto unroll = [&](auto tag, std::span<const decltype(tag)> th) {
    using T = decltype(tag);
    std::vector<T> h(4, T(0.0)), h2(4), u(2);
    T acc(0.0);
    for (const auto& x : inputs) {
      const std::vector<T> xt(x.begin(), x.end());
      policy::policy_step<T>(s, th, std::span<const T>(xt), std::span<const T>(h), kBox,
                             std::span<T>(u), std::span<T>(h2));
      h.swap(h2);
      acc = acc + u[0] * u[1];
    }
    return acc;
  };
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const auto vars = tape.variables(theta);
  const ad::Var out = unroll(ad::Var{}, std::span<const ad::Var>(vars));
  const auto g = tape.gradient(out, vars);
  const auto rep = ad::finite_diff_check(
      [&](std::span<const double> t) { return unroll(0.0, t); }, theta, g, 1e-6);
  EXPECT_LT(rep.max_relative_error, 1e-6);
}
