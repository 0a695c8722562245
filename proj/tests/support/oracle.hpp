// Reference semantics and random generators shared by the unit and
// acceptance tests. The oracle recomputes robustness from the definition over
// a plain row table, without touching the library's evaluator.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "stlgail/stl/formula.hpp"
#include "stlgail/stl/robustness.hpp"
#include "stlgail/stl/signal.hpp"

namespace testsupport {

using Rows = std::vector<std::vector<double>>;

inline Rows rows_of(const stlgail::stl::Signal& s) {
  Rows out(s.length());
  for (std::size_t t = 0; t < s.length(); ++t) out[t].assign(s.at(t).begin(), s.at(t).end());
  return out;
}

/// Robustness by direct recursion on the definition.
inline double oracle(const stlgail::stl::Formula& f, const Rows& x, int t) {
  using stlgail::stl::Kind;
  switch (f.kind()) {
    case Kind::True:
      return stlgail::stl::kTrueRobustness;
    case Kind::Pred: {
      double v = 0.0;
      for (std::size_t d = 0; d < f.predicate().a.size(); ++d) {
        v += f.predicate().a[d] * x.at(static_cast<std::size_t>(t)).at(d);
      }
      return v - f.predicate().b;
    }
    case Kind::Not:
      return -oracle(f.child(), x, t);
    case Kind::And: {
      double v = std::numeric_limits<double>::infinity();
      for (const auto& c : f.children()) v = std::min(v, oracle(c, x, t));
      return v;
    }
    case Kind::Or: {
      double v = -std::numeric_limits<double>::infinity();
      for (const auto& c : f.children()) v = std::max(v, oracle(c, x, t));
      return v;
    }
    case Kind::Eventually: {
      double v = -std::numeric_limits<double>::infinity();
      for (int u = t + f.window().t1; u <= t + f.window().t2; ++u) {
        v = std::max(v, oracle(f.child(), x, u));
      }
      return v;
    }
    case Kind::Always: {
      double v = std::numeric_limits<double>::infinity();
      for (int u = t + f.window().t1; u <= t + f.window().t2; ++u) {
        v = std::min(v, oracle(f.child(), x, u));
      }
      return v;
    }
  }
  return 0.0;
}

/// Boolean semantics by direct recursion, independent of robustness values.
inline bool oracle_sat(const stlgail::stl::Formula& f, const Rows& x, int t) {
  using stlgail::stl::Kind;
  switch (f.kind()) {
    case Kind::True:
      return true;
    case Kind::Pred: {
      double v = 0.0;
      for (std::size_t d = 0; d < f.predicate().a.size(); ++d) {
        v += f.predicate().a[d] * x.at(static_cast<std::size_t>(t)).at(d);
      }
      return v >= f.predicate().b;
    }
    case Kind::Not:
      return !oracle_sat(f.child(), x, t);
    case Kind::And:
      return std::all_of(f.children().begin(), f.children().end(),
                         [&](const auto& c) { return oracle_sat(c, x, t); });
    case Kind::Or:
      return std::any_of(f.children().begin(), f.children().end(),
                         [&](const auto& c) { return oracle_sat(c, x, t); });
    case Kind::Eventually:
      for (int u = t + f.window().t1; u <= t + f.window().t2; ++u) {
        if (oracle_sat(f.child(), x, u)) return true;
      }
      return false;
    case Kind::Always:
      for (int u = t + f.window().t1; u <= t + f.window().t2; ++u) {
        if (!oracle_sat(f.child(), x, u)) return false;
      }
      return true;
  }
  return false;
}

class Generator {
 public:
  explicit Generator(unsigned seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  /// Values on a 1/8 grid so that predicates like x >= b hit exact ties.
  double grid(double lo, double hi) {
    return std::round(real(lo, hi) * 8.0) / 8.0;
  }

  stlgail::stl::Predicate predicate(std::size_t dim, bool sparse) {
    stlgail::stl::Predicate p;
    p.a.assign(dim, 0.0);
    if (sparse) {
      p.a[static_cast<std::size_t>(integer(0, static_cast<int>(dim) - 1))] = coin() ? 1.0 : -1.0;
    } else {
      for (auto& a : p.a) a = grid(-2.0, 2.0);
      if (p.is_degenerate()) p.a[0] = 1.0;
    }
    p.b = grid(-2.0, 2.0);
    return p;
  }

  /// Random formula with at most `depth` nested operators and horizon at
  /// most `max_horizon`.
  stlgail::stl::Formula formula(std::size_t dim, int depth, int max_horizon, bool sparse = false) {
    using stlgail::stl::Formula;
    using stlgail::stl::TimeInterval;
    if (depth == 0 || integer(0, 5) == 0) {
      return integer(0, 15) == 0 ? Formula::truth() : Formula::pred(predicate(dim, sparse));
    }
    switch (integer(0, 4)) {
      case 0:
        return Formula::negate(formula(dim, depth - 1, max_horizon, sparse));
      case 1:
      case 2: {
        std::vector<Formula> kids;
        const int n = integer(2, 3);
        for (int i = 0; i < n; ++i) kids.push_back(formula(dim, depth - 1, max_horizon, sparse));
        return integer(1, 2) == 1 ? Formula::conjunction(std::move(kids))
                                  : Formula::disjunction(std::move(kids));
      }
      default: {
        const int budget = max_horizon / 2;
        const int t1 = integer(0, budget);
        const int t2 = integer(t1, budget);
        auto inner = formula(dim, depth - 1, max_horizon - t2, sparse);
        return coin() ? Formula::eventually(TimeInterval::make(t1, t2), std::move(inner))
                      : Formula::always(TimeInterval::make(t1, t2), std::move(inner));
      }
    }
  }

  stlgail::stl::Signal signal(std::size_t dim, int last_time, bool on_grid = true) {
    std::vector<std::string> names;
    for (std::size_t d = 0; d < dim; ++d) names.push_back("x" + std::to_string(d));
    std::vector<double> values;
    for (int t = 0; t <= last_time; ++t) {
      for (std::size_t d = 0; d < dim; ++d) values.push_back(on_grid ? grid(-3.0, 3.0) : real(-3.0, 3.0));
    }
    return {std::move(names), std::move(values)};
  }

  std::mt19937& engine() { return rng_; }

 private:
  std::mt19937 rng_;
};

inline std::vector<std::string> names_of(std::size_t dim) {
  std::vector<std::string> n;
  for (std::size_t d = 0; d < dim; ++d) n.push_back("x" + std::to_string(d));
  return n;
}

}  // namespace testsupport
