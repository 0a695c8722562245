// STL formulas for the fragment
//
//   phi ::= TRUE | a.x >= b | !phi | phi & phi & ... | phi | phi | ...
//         | F[t1,t2] phi | G[t1,t2] phi
//
// Formulas are plain values (a tree of `Formula` nodes). Intervals are
// absolute integer time steps relative to the evaluation instant.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace stlgail::stl {

struct TimeInterval {
  int t1 = 0;
  int t2 = 0;

  /// Throws InvalidArgument unless 0 <= t1 <= t2.
  static TimeInterval make(int t1, int t2);
  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Canonical predicate a.x(t) >= b.
struct Predicate {
  std::vector<double> a;
  double b = 0.0;

  std::size_t dim() const noexcept { return a.size(); }
  bool is_degenerate() const noexcept;
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

enum class Kind { True, Pred, Not, And, Or, Eventually, Always };

class Formula {
 public:
  static Formula truth();
  static Formula pred(Predicate p);
  /// Single-variable shorthand: x_index >= b over a signal of `dim` components.
  static Formula pred(std::size_t dim, std::size_t index, double b);
  static Formula negate(Formula f);
  /// Requires at least two children.
  static Formula conjunction(std::vector<Formula> children);
  static Formula disjunction(std::vector<Formula> children);
  static Formula eventually(TimeInterval window, Formula f);
  static Formula always(TimeInterval window, Formula f);

  Kind kind() const noexcept { return kind_; }
  const Predicate& predicate() const noexcept { return pred_; }
  const TimeInterval& window() const noexcept { return window_; }
  const std::vector<Formula>& children() const noexcept { return children_; }
  const Formula& child() const { return children_.front(); }

  bool is_temporal() const noexcept {
    return kind_ == Kind::Eventually || kind_ == Kind::Always;
  }

  /// Signal dimension referenced by the predicates, 0 when there are none.
  std::size_t dim() const;

  friend bool operator==(const Formula&, const Formula&) = default;

 private:
  Formula() = default;

  Kind kind_ = Kind::True;
  Predicate pred_;
  TimeInterval window_;
  std::vector<Formula> children_;
};

/// Minimum number of steps after t needed to decide satisfaction at t.
int horizon(const Formula& f);

/// And(f1, f2) without simplification. Throws DimensionMismatch when both
/// sides reference predicates of different dimension.
Formula conjoin(const Formula& f1, const Formula& f2);

/// Number of nodes in the tree.
std::size_t size(const Formula& f);

}  // namespace stlgail::stl
