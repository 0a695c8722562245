#include "stlgail/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stlgail/ad/scalar.hpp"
#include "stlgail/error.hpp"

namespace stlgail::ad {
namespace {

thread_local Tape* g_active = nullptr;

Tape& require_tape() {
  if (g_active == nullptr) {
    throw std::logic_error("operation on a tape variable without an active tape");
  }
  return *g_active;
}

// Scratch buffers for n-ary nodes; one set per thread.
thread_local std::vector<double> g_weights;
thread_local std::vector<double> g_values;
thread_local std::vector<double> g_partials;
thread_local std::vector<Var> g_parents;

template <class F>
Var unary(const Var& x, double value, F&& partial) {
  if (x.is_constant()) return Var(value);
  return require_tape().record(value, {{x, partial()}});
}

}  // namespace

Tape::Tape() = default;

std::uint32_t Tape::push_node() {
  if (edge_end_.size() >= Var::kConstant) {
    throw std::length_error("tape node limit reached");
  }
  edge_end_.push_back(static_cast<std::uint32_t>(parent_.size()));
  return static_cast<std::uint32_t>(edge_end_.size() - 1);
}

Var Tape::variable(double v) { return Var(v, push_node()); }

std::vector<Var> Tape::variables(std::span<const double> values) {
  std::vector<Var> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(variable(v));
  return out;
}

Var Tape::record(double value,
                 std::initializer_list<std::pair<Var, double>> edges) {
  bool any = false;
  for (const auto& [p, d] : edges) {
    if (!p.is_constant()) {
      parent_.push_back(p.id());
      partial_.push_back(d);
      any = true;
    }
  }
  if (!any) return Var(value);
  return Var(value, push_node());
}

Var Tape::record(double value, std::span<const Var> parents,
                 std::span<const double> partials) {
  bool any = false;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (!parents[i].is_constant()) {
      parent_.push_back(parents[i].id());
      partial_.push_back(partials[i]);
      any = true;
    }
  }
  if (!any) return Var(value);
  return Var(value, push_node());
}

std::vector<double> Tape::adjoints(const Var& output) const {
  std::vector<double> adj(edge_end_.size(), 0.0);
  if (output.is_constant()) return adj;
  if (output.id() >= adj.size()) {
    throw std::logic_error("output variable does not belong to this tape");
  }
  adj[output.id()] = 1.0;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const std::uint32_t begin = i == 0 ? 0 : edge_end_[i - 1];
    const std::uint32_t end = edge_end_[i];
    for (std::uint32_t e = begin; e < end; ++e) {
      const std::uint32_t p = parent_[e];
      if (p >= i) throw CycleDetected("tape edge points forward");
      adj[p] += partial_[e] * a;
    }
  }
  return adj;
}

std::vector<double> Tape::gradient(const Var& output,
                                   std::span<const Var> wrt) const {
  const auto adj = adjoints(output);
  std::vector<double> g(wrt.size(), 0.0);
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    if (!wrt[i].is_constant() && wrt[i].id() < adj.size()) g[i] = adj[wrt[i].id()];
  }
  return g;
}

void Tape::clear() {
  edge_end_.clear();
  parent_.clear();
  partial_.clear();
}

void Tape::reserve(std::size_t nodes, std::size_t edges) {
  edge_end_.reserve(nodes);
  parent_.reserve(edges);
  partial_.reserve(edges);
}

Tape* active_tape() noexcept { return g_active; }

TapeScope::TapeScope(Tape& tape) noexcept : previous_(g_active) {
  g_active = &tape;
}

TapeScope::~TapeScope() { g_active = previous_; }

Var operator+(const Var& a, const Var& b) {
  const double v = a.value() + b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  return require_tape().record(v, {{a, 1.0}, {b, 1.0}});
}

Var operator-(const Var& a, const Var& b) {
  const double v = a.value() - b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  return require_tape().record(v, {{a, 1.0}, {b, -1.0}});
}

Var operator*(const Var& a, const Var& b) {
  const double v = a.value() * b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  return require_tape().record(v, {{a, b.value()}, {b, a.value()}});
}

Var operator/(const Var& a, const Var& b) {
  const double v = a.value() / b.value();
  if (a.is_constant() && b.is_constant()) return Var(v);
  return require_tape().record(
      v, {{a, 1.0 / b.value()}, {b, -v / b.value()}});
}

Var operator-(const Var& a) { return unary(a, -a.value(), [] { return -1.0; }); }

Var exp(const Var& x) {
  const double v = std::exp(x.value());
  return unary(x, v, [v] { return v; });
}

Var log(const Var& x) {
  return unary(x, std::log(x.value()), [&] { return 1.0 / x.value(); });
}

Var sqrt(const Var& x) {
  const double v = std::sqrt(x.value());
  return unary(x, v, [v] { return 0.5 / v; });
}

Var sin(const Var& x) {
  return unary(x, std::sin(x.value()), [&] { return std::cos(x.value()); });
}

Var cos(const Var& x) {
  return unary(x, std::cos(x.value()), [&] { return -std::sin(x.value()); });
}

Var tanh(const Var& x) {
  const double v = std::tanh(x.value());
  return unary(x, v, [v] { return 1.0 - v * v; });
}

Var sigmoid(const Var& x) {
  const double v = ad::sigmoid(x.value());
  return unary(x, v, [v] { return v * (1.0 - v); });
}

Var relu(const Var& x) {
  const double v = x.value() > 0.0 ? x.value() : 0.0;
  return unary(x, v, [&] { return x.value() > 0.0 ? 1.0 : 0.0; });
}

Var affine(std::span<const Var> w, std::span<const Var> x, const Var& bias) {
  if (w.size() != x.size()) throw DimensionMismatch("affine: size mismatch");
  double v = bias.value();
  for (std::size_t i = 0; i < w.size(); ++i) v += w[i].value() * x[i].value();
  g_parents.clear();
  g_partials.clear();
  for (std::size_t i = 0; i < w.size(); ++i) {
    g_parents.push_back(w[i]);
    g_partials.push_back(x[i].value());
    g_parents.push_back(x[i]);
    g_partials.push_back(w[i].value());
  }
  g_parents.push_back(bias);
  g_partials.push_back(1.0);
  const bool all_const =
      std::all_of(g_parents.begin(), g_parents.end(),
                  [](const Var& p) { return p.is_constant(); });
  if (all_const) return Var(v);
  return require_tape().record(v, g_parents, g_partials);
}

Var affine(std::span<const Var> w, std::span<const double> x, const Var& bias) {
  if (w.size() != x.size()) throw DimensionMismatch("affine: size mismatch");
  double v = bias.value();
  bool all_const = bias.is_constant();
  for (std::size_t i = 0; i < w.size(); ++i) {
    v += w[i].value() * x[i];
    all_const = all_const && w[i].is_constant();
  }
  if (all_const) return Var(v);
  g_parents.assign(w.begin(), w.end());
  g_parents.push_back(bias);
  g_partials.assign(x.begin(), x.end());
  g_partials.push_back(1.0);
  return require_tape().record(v, g_parents, g_partials);
}

Var sum(std::span<const Var> values) {
  double v = 0.0;
  bool all_const = true;
  for (const auto& x : values) {
    v += x.value();
    all_const = all_const && x.is_constant();
  }
  if (all_const) return Var(v);
  g_partials.assign(values.size(), 1.0);
  return require_tape().record(v, values, g_partials);
}

double softmax_average(std::span<const double> values, double tau,
                       std::span<double> weights) {
  if (values.empty()) throw EmptyInput("smooth max/min of an empty list");
  if (!(tau > 0.0)) throw InvalidArgument("temperature must be positive");
  const double m = *std::max_element(values.begin(), values.end());
  double z = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    weights[i] = std::exp((values[i] - m) / tau);
    z += weights[i];
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    weights[i] /= z;
    s += weights[i] * values[i];
  }
  return s;
}

Var smooth_max(std::span<const Var> values, double tau) {
  const std::size_t n = values.size();
  g_values.resize(n);
  g_weights.resize(n);
  bool all_const = true;
  for (std::size_t i = 0; i < n; ++i) {
    g_values[i] = values[i].value();
    all_const = all_const && values[i].is_constant();
  }
  const double s = softmax_average(g_values, tau, g_weights);
  if (all_const) return Var(s);
  g_partials.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g_partials[i] = g_weights[i] * (1.0 + (g_values[i] - s) / tau);
  }
  return require_tape().record(s, values, g_partials);
}

Var smooth_min(std::span<const Var> values, double tau) {
  const std::size_t n = values.size();
  g_values.resize(n);
  g_weights.resize(n);
  bool all_const = true;
  for (std::size_t i = 0; i < n; ++i) {
    g_values[i] = -values[i].value();
    all_const = all_const && values[i].is_constant();
  }
  const double s = -softmax_average(g_values, tau, g_weights);
  if (all_const) return Var(s);
  g_partials.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g_partials[i] = g_weights[i] * (1.0 - (-g_values[i] - s) / tau);
  }
  return require_tape().record(s, values, g_partials);
}

double affine(std::span<const double> w, std::span<const double> x, double bias) {
  if (w.size() != x.size()) throw DimensionMismatch("affine: size mismatch");
  double v = bias;
  for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * x[i];
  return v;
}

double sum(std::span<const double> values) {
  double v = 0.0;
  for (double x : values) v += x;
  return v;
}

double smooth_max(std::span<const double> values, double tau) {
  g_weights.resize(values.size());
  return softmax_average(values, tau, g_weights);
}

double smooth_min(std::span<const double> values, double tau) {
  g_values.resize(values.size());
  g_weights.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) g_values[i] = -values[i];
  return -softmax_average(g_values, tau, g_weights);
}

}  // namespace stlgail::ad
