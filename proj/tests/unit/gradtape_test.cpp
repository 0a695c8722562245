#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stlgail/ad/adam.hpp"
#include "stlgail/ad/finite_diff.hpp"
#include "stlgail/ad/param_vector.hpp"
#include "stlgail/ad/scalar.hpp"
#include "stlgail/ad/tape.hpp"
#include "stlgail/error.hpp"

using namespace stlgail;
using ad::Tape;
using ad::TapeScope;
using ad::Var;

namespace {

double grad_of(Var (*g)(const Var&), double x) {
  Tape tape;
  TapeScope scope(tape);
  const Var v = tape.variable(x);
  const Var y = g(v);
  return tape.gradient(y, std::span<const Var>(&v, 1))[0];
}

}  // namespace

TEST(Tape, ConstantsStayOffTheTape) {
  Tape tape;
  TapeScope scope(tape);
  const Var a(2.0);
  const Var b = a * Var(3.0) + ad::exp(a);
  EXPECT_TRUE(b.is_constant());
  EXPECT_EQ(tape.node_count(), 0u);
  EXPECT_DOUBLE_EQ(b.value(), 6.0 + std::exp(2.0));
}

TEST(Tape, ArithmeticGradients) {
  Tape tape;
  TapeScope scope(tape);
  const Var x = tape.variable(1.5);
  const Var y = tape.variable(-0.5);
  const Var z = (x * y - x / y) + (-x) - y;
  const Var wrt[2] = {x, y};
  const auto g = tape.gradient(z, wrt);
  EXPECT_NEAR(g[0], -0.5 - 1.0 / -0.5 - 1.0, 1e-12);
  EXPECT_NEAR(g[1], 1.5 + 1.5 / 0.25 - 1.0, 1e-12);
}

TEST(Tape, PrimitiveDerivatives) {
  const double x = 0.7;
  EXPECT_NEAR(grad_of(ad::exp, x), std::exp(x), 1e-12);
  EXPECT_NEAR(grad_of(ad::log, x), 1.0 / x, 1e-12);
  EXPECT_NEAR(grad_of(ad::sqrt, x), 0.5 / std::sqrt(x), 1e-12);
  EXPECT_NEAR(grad_of(ad::sin, x), std::cos(x), 1e-12);
  EXPECT_NEAR(grad_of(ad::cos, x), -std::sin(x), 1e-12);
  EXPECT_NEAR(grad_of(ad::tanh, x), 1.0 - std::tanh(x) * std::tanh(x), 1e-12);
  const double s = 1.0 / (1.0 + std::exp(-x));
  EXPECT_NEAR(grad_of(ad::sigmoid, x), s * (1.0 - s), 1e-12);
  EXPECT_EQ(grad_of(ad::relu, x), 1.0);
  EXPECT_EQ(grad_of(ad::relu, -x), 0.0);
  EXPECT_EQ(grad_of(ad::relu, 0.0), 0.0);
}

TEST(Tape, SharedSubexpressionsAccumulate) {
  Tape tape;
  TapeScope scope(tape);
  const Var x = tape.variable(3.0);
  Var y = x;
  for (int i = 0; i < 4; ++i) y = y * x;
  EXPECT_NEAR(tape.gradient(y, std::span<const Var>(&x, 1))[0], 5.0 * 81.0, 1e-9);
}

TEST(Tape, UnreachableAndConstantWrtAreZero) {
  Tape tape;
  TapeScope scope(tape);
  const Var x = tape.variable(1.0);
  const Var u = tape.variable(2.0);
  const Var y = x * x;
  const Var wrt[3] = {x, u, Var(5.0)};
  const auto g = tape.gradient(y, wrt);
  EXPECT_DOUBLE_EQ(g[0], 2.0);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 0.0);
}

TEST(Tape, ClearResets) {
  Tape tape;
  TapeScope scope(tape);
  const Var x = tape.variable(1.0);
  (void)(x * x);
  EXPECT_GT(tape.node_count(), 0u);
  tape.clear();
  EXPECT_EQ(tape.node_count(), 0u);
  EXPECT_EQ(tape.edge_count(), 0u);
}

TEST(Tape, ScopesNest) {
  Tape outer;
  Tape inner;
  {
    TapeScope a(outer);
    EXPECT_EQ(ad::active_tape(), &outer);
    {
      TapeScope b(inner);
      EXPECT_EQ(ad::active_tape(), &inner);
    }
    EXPECT_EQ(ad::active_tape(), &outer);
  }
  EXPECT_EQ(ad::active_tape(), nullptr);
}

TEST(SmoothMax, BoundsAndLimits) {
  const std::vector<double> v{1.0, 3.0, 2.0};
  for (double tau : {0.01, 0.5, 5.0}) {
    const double m = ad::smooth_max(v, tau);
    EXPECT_GE(m, 1.0);
    EXPECT_LE(m, 3.0);
    EXPECT_LE(ad::smooth_min(v, tau), m);
  }
  EXPECT_NEAR(ad::smooth_max(v, 1e-3), 3.0, 1e-9);
  EXPECT_NEAR(ad::smooth_min(v, 1e-3), 1.0, 1e-9);
  EXPECT_NEAR(ad::smooth_max(v, 1e6), 2.0, 1e-5);
  EXPECT_THROW(ad::smooth_max(std::vector<double>{}, 1.0), EmptyInput);
  EXPECT_THROW(ad::smooth_max(v, 0.0), InvalidArgument);
}

TEST(SmoothMax, LargeValuesStayFinite) {
  const std::vector<double> v{1e9, -1e9, 3.0};
  EXPECT_TRUE(std::isfinite(ad::smooth_max(v, 0.01)));
  EXPECT_TRUE(std::isfinite(ad::smooth_min(v, 0.01)));
}

TEST(SmoothMax, VarMatchesDouble) {
  Tape tape;
  TapeScope scope(tape);
  const std::vector<double> x{0.3, -1.2, 0.8, 0.79};
  const auto vars = tape.variables(x);
  const Var m = ad::smooth_max(std::span<const Var>(vars), 0.2);
  EXPECT_DOUBLE_EQ(m.value(), ad::smooth_max(x, 0.2));
  double total = 0.0;
  for (double g : tape.gradient(m, vars)) total += g;
  // The softmax average shifts one-for-one with a common offset.
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(FiniteDiff, PrimitivesAgree) {
  const std::vector<double> theta{0.4, -0.3, 1.1};
  auto fn = [](auto x0, auto x1, auto x2) {
    using ad::exp;
    using ad::log;
    using ad::sigmoid;
    using ad::sin;
    using ad::sqrt;
    using ad::tanh;
    return exp(x0) * sin(x1) + log(x2) / sqrt(x2) + tanh(x0 * x1) - sigmoid(x2 - x0);
  };
  Tape tape;
  TapeScope scope(tape);
  const auto v = tape.variables(theta);
  const Var y = fn(v[0], v[1], v[2]);
  const auto g = tape.gradient(y, v);
  const auto rep = ad::finite_diff_check(
      [&](std::span<const double> t) { return fn(t[0], t[1], t[2]); }, theta, g, 1e-6);
  EXPECT_LT(rep.max_relative_error, 1e-7);
  EXPECT_TRUE(rep.skipped.empty());
}

TEST(FiniteDiff, SkipsKinks) {
  const std::vector<double> theta{0.0, 1.0};
  const std::vector<double> analytic{0.0, 1.0};
  const auto rep = ad::finite_diff_check(
      [](std::span<const double> t) { return std::abs(t[0]) + t[1]; }, theta, analytic, 1e-6);
  EXPECT_EQ(rep.skipped, std::vector<std::size_t>{0});
  EXPECT_LT(rep.max_relative_error, 1e-8);
}

TEST(FiniteDiff, NonFiniteThrows) {
  const std::vector<double> theta{0.0};
  const std::vector<double> analytic{0.0};
  EXPECT_THROW(ad::finite_diff_check([](std::span<const double>) { return NAN; }, theta,
                                     analytic, 1e-6),
               NonFiniteValue);
}

TEST(ParamVector, Groups) {
  ad::ParamVector p;
  p.add_group("a", 2, 1.0);
  p.add_group("b", 3);
  EXPECT_THROW(p.add_group("a", 1), InvalidArgument);
  p.group("a")[1] = 5.0;
  EXPECT_EQ(p.size(), 5u);
  EXPECT_EQ(p.group_info("b").offset, 2u);
  EXPECT_DOUBLE_EQ(p.flat()[1], 5.0);
  EXPECT_TRUE(p.has_group("b"));
  EXPECT_FALSE(p.has_group("c"));
  EXPECT_THROW(p.unflatten(std::vector<double>(4)), DimensionMismatch);
  p.unflatten(std::vector<double>{1, 2, 3, 4, 5});
  EXPECT_DOUBLE_EQ(p.group("b")[2], 5.0);
  ad::ParamVector q;
  q.add_group("a", 2);
  q.add_group("b", 3);
  EXPECT_TRUE(p.same_layout(q));
}

TEST(Adam, MinimizesQuadratic) {
  std::vector<double> x{3.0, -2.0};
  ad::Adam opt(2, {0.1});
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> g{2.0 * (x[0] - 1.0), 2.0 * (x[1] + 1.0)};
    opt.step(x, g);
  }
  EXPECT_NEAR(x[0], 1.0, 1e-2);
  EXPECT_NEAR(x[1], -1.0, 1e-2);
  EXPECT_EQ(opt.steps_taken(), 500u);
  EXPECT_THROW(opt.step(x, std::vector<double>{1.0}), DimensionMismatch);
}
