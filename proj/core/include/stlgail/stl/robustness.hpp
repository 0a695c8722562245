#pragma once

#include "stlgail/stl/formula.hpp"
#include "stlgail/stl/signal.hpp"

namespace stlgail::stl {

/// Robustness assigned to TRUE. Finite so that smooth arithmetic built on top
/// of exact values stays finite.
inline constexpr double kTrueRobustness = 1e9;

/// Quantitative semantics r(s, f, t).
/// Throws HorizonExceeded when t + horizon(f) > T and DimensionMismatch when a
/// predicate does not match `s.dim()`.
double robustness(const Signal& s, const Formula& f, int t = 0);

/// r(s, f, 0) >= 0. A robustness of exactly zero counts as satisfaction.
bool satisfies(const Signal& s, const Formula& f);

}  // namespace stlgail::stl
