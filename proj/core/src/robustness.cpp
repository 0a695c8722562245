#include "stlgail/stl/robustness.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "stlgail/error.hpp"

namespace stlgail::stl {
namespace {

double eval(const Signal& s, const Formula& f, int t) {
  switch (f.kind()) {
    case Kind::True:
      return kTrueRobustness;
    case Kind::Pred: {
      const auto& p = f.predicate();
      if (p.dim() != s.dim()) {
        throw DimensionMismatch("predicate has dimension " +
                                std::to_string(p.dim()) + ", signal has " +
                                std::to_string(s.dim()));
      }
      const auto x = s.at(static_cast<std::size_t>(t));
      double acc = 0.0;
      for (std::size_t d = 0; d < p.a.size(); ++d) acc += p.a[d] * x[d];
      return acc - p.b;
    }
    case Kind::Not:
      return -eval(s, f.child(), t);
    case Kind::And: {
      double r = std::numeric_limits<double>::infinity();
      for (const auto& c : f.children()) r = std::min(r, eval(s, c, t));
      return r;
    }
    case Kind::Or: {
      double r = -std::numeric_limits<double>::infinity();
      for (const auto& c : f.children()) r = std::max(r, eval(s, c, t));
      return r;
    }
    case Kind::Eventually: {
      double r = -std::numeric_limits<double>::infinity();
      for (int tau = t + f.window().t1; tau <= t + f.window().t2; ++tau) {
        r = std::max(r, eval(s, f.child(), tau));
      }
      return r;
    }
    case Kind::Always: {
      double r = std::numeric_limits<double>::infinity();
      for (int tau = t + f.window().t1; tau <= t + f.window().t2; ++tau) {
        r = std::min(r, eval(s, f.child(), tau));
      }
      return r;
    }
  }
  return 0.0;
}

}  // namespace

double robustness(const Signal& s, const Formula& f, int t) {
  if (t < 0 || t + horizon(f) > s.last_time()) {
    throw HorizonExceeded("formula horizon " + std::to_string(horizon(f)) +
                          " at t=" + std::to_string(t) +
                          " exceeds signal end T=" +
                          std::to_string(s.last_time()));
  }
  return eval(s, f, t);
}

bool satisfies(const Signal& s, const Formula& f) {
  return robustness(s, f, 0) >= 0.0;
}

}  // namespace stlgail::stl
