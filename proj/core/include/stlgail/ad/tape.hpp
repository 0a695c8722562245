// Reverse-mode automatic differentiation over scalar expression graphs.
//
// A `Tape` records every non-constant intermediate as a node holding the
// local partial derivatives to its parents. Nodes are appended in creation
// order, so parents always precede children and the reverse sweep in
// `Tape::adjoints` is a valid reverse topological order.
//
// `Var` is a value plus a node id. Vars built from plain doubles are
// constants: they never touch the tape, and any operation whose operands are
// all constants folds to another constant. Operations on non-constant Vars
// record onto the thread's active tape (see `TapeScope`).
#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace stlgail::ad {

class Tape;

class Var {
 public:
  static constexpr std::uint32_t kConstant = 0xffffffffu;

  Var() = default;
  Var(double constant) noexcept : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const noexcept { return value_; }
  std::uint32_t id() const noexcept { return id_; }
  bool is_constant() const noexcept { return id_ == kConstant; }

 private:
  friend class Tape;
  Var(double v, std::uint32_t id) noexcept : value_(v), id_(id) {}

  double value_ = 0.0;
  std::uint32_t id_ = kConstant;
};

class Tape {
 public:
  Tape();

  /// New independent variable (a leaf node).
  Var variable(double v);
  std::vector<Var> variables(std::span<const double> values);

  /// Records `value` with the given local partials. Constant parents are
  /// dropped; if nothing remains the result is a constant.
  Var record(double value, std::initializer_list<std::pair<Var, double>> edges);
  Var record(double value, std::span<const Var> parents,
             std::span<const double> partials);

  /// d output / d node for every node, by one reverse sweep.
  /// Throws CycleDetected if the edge list is not topologically ordered.
  std::vector<double> adjoints(const Var& output) const;

  /// d output / d v for each v in `wrt` (0 for constants and unreachable
  /// nodes).
  std::vector<double> gradient(const Var& output, std::span<const Var> wrt) const;

  std::size_t node_count() const noexcept { return edge_end_.size(); }
  std::size_t edge_count() const noexcept { return parent_.size(); }

  void clear();
  void reserve(std::size_t nodes, std::size_t edges);

 private:
  std::uint32_t push_node();

  std::vector<std::uint32_t> edge_end_;
  std::vector<std::uint32_t> parent_;
  std::vector<double> partial_;
};

/// The tape non-constant operations record onto, or nullptr.
Tape* active_tape() noexcept;

/// Makes `tape` the active tape of this thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape) noexcept;
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Arithmetic.
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

// Comparisons look at values only.
inline bool operator<(const Var& a, const Var& b) { return a.value() < b.value(); }
inline bool operator>(const Var& a, const Var& b) { return a.value() > b.value(); }

Var exp(const Var& x);
Var log(const Var& x);
Var sqrt(const Var& x);
Var sin(const Var& x);
Var cos(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
/// max(0, x); the subgradient at 0 is 0.
Var relu(const Var& x);

/// sum_i w_i x_i + bias as a single node.
Var affine(std::span<const Var> w, std::span<const Var> x, const Var& bias);
Var affine(std::span<const Var> w, std::span<const double> x, const Var& bias);
Var sum(std::span<const Var> values);

/// Softmax-weighted average: sum_i p_i v_i with p = softmax(v / tau).
/// Lies in [min v, max v]. Throws EmptyInput on an empty list and
/// InvalidArgument unless tau > 0.
Var smooth_max(std::span<const Var> values, double tau);
/// -smooth_max(-v, tau).
Var smooth_min(std::span<const Var> values, double tau);

inline double value_of(const Var& v) noexcept { return v.value(); }

}  // namespace stlgail::ad
