#include <gtest/gtest.h>

#include <cmath>

#include "models.hpp"
#include "oracle.hpp"
#include "stlgail/ad/finite_diff.hpp"
#include "stlgail/error.hpp"
#include "stlgail/infer/extract.hpp"
#include "stlgail/infer/network.hpp"
#include "stlgail/stl/parser.hpp"
#include "stlgail/stl/robustness.hpp"
#include "stlgail/train/mcr.hpp"

using namespace stlgail;
using infer::kGateSaturation;

namespace {

/// One conjunction holding only atom `j`.
infer::InferenceModel single_atom(int j, double a, double b, int s, int e, int horizon) {
  const auto shape = testsupport::shape_of(1, 1, 1, horizon);
  infer::InferenceModel m;
  m.shape = shape;
  m.normalizer = infer::Normalizer::identity(1);
  m.params = infer::make_params(shape);
  m.params.group("pred.a")[0] = a;
  m.params.group("pred.b")[0] = b;
  for (auto& g : m.params.group("gate.atom")) g = -kGateSaturation;
  m.params.group("gate.atom")[static_cast<std::size_t>(j)] = kGateSaturation;
  m.params.group("gate.conj")[0] = kGateSaturation;
  m.params.group("window.start")[static_cast<std::size_t>(j)] = s;
  m.params.group("window.end")[static_cast<std::size_t>(j)] = e;
  return m;
}

stl::Signal series(std::vector<double> v) { return {{"x0"}, std::move(v)}; }

}  // namespace

TEST(Shape, AxisAlignedRoundRobin) {
  const auto s = testsupport::shape_of(3, 5, 2, 10);
  EXPECT_EQ(s.predicate_dim, (std::vector<int>{0, 1, 2, 0, 1}));
  EXPECT_EQ(s.n_atoms(), 10);
  EXPECT_NO_THROW(s.validate());
  auto bad = s;
  bad.predicate_dim[0] = 3;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Params, Layout) {
  const auto s = testsupport::shape_of(2, 3, 2, 10);
  const auto p = infer::make_params(s);
  const std::vector<std::string> names{"pred.a",       "pred.b",    "window.start",
                                       "window.end",   "gate.atom", "gate.conj"};
  ASSERT_EQ(p.groups().size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(p.groups()[i].name, names[i]);
  const auto l = infer::ParamLayout::of(s);
  EXPECT_EQ(l.total, p.size());
  EXPECT_EQ(p.group("pred.a").size(), 6u);
  EXPECT_EQ(p.group("gate.atom").size(), 12u);
  EXPECT_EQ(l.gate_conj, p.group_info("gate.conj").offset);
}

TEST(Normalizer, FitsToUnitRange) {
  stl::SignalSet d{{stl::Signal({"a", "b"}, {0.0, 5.0, 4.0, 5.0}), 1},
                   {stl::Signal({"a", "b"}, {2.0, 5.0, -2.0, 5.0}), -1}};
  const auto n = infer::Normalizer::fit(d);
  EXPECT_DOUBLE_EQ(n.mid[0], 1.0);
  EXPECT_DOUBLE_EQ(n.half[0], 3.0);
  EXPECT_DOUBLE_EQ(n.half[1], 1.0);
  const auto x = n.apply(d[0].signal);
  EXPECT_DOUBLE_EQ(x[2], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 0.0);
  EXPECT_THROW(infer::Normalizer::fit({}), EmptyDataset);
}

TEST(Network, SingleEventuallyAtom) {
  const auto m = single_atom(0, 1.0, 0.5, 1, 3, 4);
  const auto s = series({0.0, 0.2, 1.5, 0.1, 9.0});
  EXPECT_NEAR(infer::infer_robustness(s, m, 1e-3), 1.0, 5e-3);
  const auto f = infer::extract_formula(m, 0.5, false);
  EXPECT_EQ(stl::print(f, {"x0"}), "F[1,3](x0 >= 0.5)");
}

TEST(Network, SingleAlwaysAtom) {
  const auto m = single_atom(1, -1.0, -2.0, 0, 2, 4);
  const auto s = series({0.0, 1.5, 1.0, -5.0, 5.0});
  // G[0,2](-x >= -2): min over 2 - x(t) for t = 0..2
  EXPECT_NEAR(infer::infer_robustness(s, m, 1e-3), 0.5, 5e-3);
  EXPECT_EQ(infer::classify(s, m, 1e-3), 1);
  EXPECT_EQ(stl::print(infer::extract_formula(m), {"x0"}), "G[0,2](x0 < 2)");
}

TEST(Network, EmptySelectionsAreTrue) {
  auto m = single_atom(0, 1.0, 0.0, 0, 2, 3);
  for (auto& g : m.params.group("gate.atom")) g = -kGateSaturation;
  const auto s = series({-1.0, -1.0, -1.0, -1.0});
  EXPECT_GE(infer::infer_robustness(s, m), 0.0);
  EXPECT_EQ(infer::extract_formula(m).kind(), stl::Kind::True);
  m.params.group("gate.conj")[0] = -kGateSaturation;
  EXPECT_DOUBLE_EQ(infer::infer_robustness(s, m), m.shape.inert);
}

TEST(Network, KnownRuleIsConjoined) {
  auto m = single_atom(0, 1.0, 0.0, 0, 3, 3);
  const auto s = series({1.0, 2.0, 3.0, 4.0});
  const double alone = infer::infer_robustness(s, m, 1e-3);
  m.known_rule = stl::parse("G[0,3](x0 < 3.5)", {"x0"});
  EXPECT_NEAR(alone, 4.0, 5e-3);
  EXPECT_LT(infer::infer_robustness(s, m, 1e-3), 0.0);
}

TEST(Network, SmoothTracksExtractedFormula) {
  testsupport::Generator gen(3);
  const auto shape = testsupport::shape_of(2, 4, 2, 10);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const auto m = testsupport::hardened_model(gen, shape);
    const auto f = infer::extract_formula(m, 0.5, false);
    const auto s = gen.signal(2, 10, false);
    const double exact = stl::robustness(s, f);
    const double smooth = infer::infer_robustness(s, m, 0.01);
    if (std::abs(exact) > 1e6) continue;
    ++checked;
    EXPECT_LE(std::abs(smooth - exact), 0.05 * std::abs(exact) + 0.05) << i;
  }
  EXPECT_GT(checked, 30);
}

TEST(Network, GradientMatchesFiniteDifferences) {
  testsupport::Generator gen(8);
  const auto shape = testsupport::shape_of(2, 2, 2, 6, 0.5);
  auto m = testsupport::hardened_model(gen, shape);
  auto theta = std::vector<double>(m.params.flat().begin(), m.params.flat().end());
  for (auto& v : theta) v += gen.real(-0.3, 0.3);
  for (std::size_t i = infer::ParamLayout::of(shape).gate_atom; i < theta.size(); ++i) {
    theta[i] = gen.real(-2.0, 2.0);
  }
  const auto s = gen.signal(2, 6, false);
  const auto x = m.normalizer.apply(s);
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const auto vars = tape.variables(theta);
  const infer::Evaluator<ad::Var> net(shape, std::span<const ad::Var>(vars), shape.tau);
  const ad::Var out = net(std::span<const double>(x));
  const auto g = tape.gradient(out, vars);
  const auto rep = ad::finite_diff_check(
      [&](std::span<const double> t) {
        return infer::Evaluator<double>(shape, t, shape.tau)(std::span<const double>(x));
      },
      theta, g, 1e-6);
  EXPECT_LT(rep.max_relative_error, 1e-5);
}

TEST(Network, WrongParameterLength) {
  const auto shape = testsupport::shape_of(1, 1, 1, 3);
  const std::vector<double> theta(3, 0.0);
  EXPECT_THROW(infer::Evaluator<double>(shape, theta, 0.1), DimensionMismatch);
}

TEST(Network, HorizonChecked) {
  const auto m = single_atom(0, 1.0, 0.0, 0, 2, 5);
  EXPECT_THROW(infer::infer_robustness(series({1.0, 2.0, 3.0}), m), HorizonExceeded);
}

TEST(Extract, RoundedWindows) {
  EXPECT_EQ(infer::rounded_window(1.4, 3.6, 10), (stl::TimeInterval{1, 4}));
  EXPECT_EQ(infer::rounded_window(-2.0, 30.0, 10), (stl::TimeInterval{0, 10}));
  EXPECT_EQ(infer::rounded_window(6.0, 2.0, 10), (stl::TimeInterval{6, 6}));
}

TEST(Extract, DenormalizesPredicates) {
  auto m = single_atom(0, 2.0, 1.0, 0, 1, 1);
  m.normalizer.mid = {10.0};
  m.normalizer.half = {5.0};
  // 2 (x - 10) / 5 >= 1  <=>  x >= 12.5
  const auto f = infer::extract_formula(m);
  EXPECT_EQ(stl::print(f, {"x0"}), "F[0,1](x0 >= 12.5)");
  const auto s = series({11.0, 14.0});
  EXPECT_NEAR(stl::robustness(s, infer::extract_formula(m, 0.5, false)),
              infer::infer_robustness(s, m, 1e-3), 5e-3);
}

TEST(Extract, GateThreshold) {
  auto m = single_atom(0, 1.0, 0.0, 0, 1, 1);
  m.params.group("gate.atom")[0] = 0.0;  // sigmoid 0.5
  EXPECT_EQ(infer::extract_formula(m, 0.4).kind(), stl::Kind::Eventually);
  EXPECT_EQ(infer::extract_formula(m, 0.6).kind(), stl::Kind::True);
  EXPECT_THROW(infer::extract_formula(m, 1.0), InvalidArgument);
}

TEST(Extract, HardenSnapsToLattice) {
  auto m = single_atom(0, 1.0, 0.0, 0, 1, 4);
  m.params.group("window.start")[0] = 0.7;
  m.params.group("window.end")[0] = 2.2;
  m.params.group("gate.atom")[1] = 0.3;
  infer::harden(m.params, m.shape);
  EXPECT_EQ(m.params.group("window.start")[0], 1.0);
  EXPECT_EQ(m.params.group("window.end")[0], 2.0);
  EXPECT_EQ(m.params.group("gate.atom")[1], kGateSaturation);
  EXPECT_EQ(m.params.group("gate.atom")[0], kGateSaturation);
}

TEST(Extract, SimplifyKeepsMcr) {
  const std::vector<std::string> names{"x0"};
  const auto f = stl::parse("F[0,2](x0 > 1) & G[0,2](x0 > -100)", names);
  stl::SignalSet data{{series({0.0, 2.0, 0.0}), 1}, {series({0.0, 0.5, 0.0}), -1}};
  const auto g = infer::simplify(f, data);
  EXPECT_EQ(stl::print(g, names), "F[0,2](x0 >= 1)");
  EXPECT_LE(train::mcr(g, data), train::mcr(f, data));
}
