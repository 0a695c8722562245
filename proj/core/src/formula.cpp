#include "stlgail/stl/formula.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "stlgail/error.hpp"
#include "stlgail/stl/signal.hpp"

namespace stlgail::stl {

TimeInterval TimeInterval::make(int t1, int t2) {
  if (t1 < 0 || t2 < t1) {
    throw InvalidArgument("invalid interval [" + std::to_string(t1) + "," +
                          std::to_string(t2) + "]");
  }
  return {t1, t2};
}

bool Predicate::is_degenerate() const noexcept {
  return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
}

Formula Formula::truth() { return Formula{}; }

Formula Formula::pred(Predicate p) {
  if (p.a.empty() || p.is_degenerate()) {
    throw InvalidArgument("predicate needs a nonzero coefficient");
  }
  Formula f;
  f.kind_ = Kind::Pred;
  f.pred_ = std::move(p);
  return f;
}

Formula Formula::pred(std::size_t dim, std::size_t index, double b) {
  if (index >= dim) throw DimensionMismatch("predicate index out of range");
  Predicate p;
  p.a.assign(dim, 0.0);
  p.a[index] = 1.0;
  p.b = b;
  return pred(std::move(p));
}

Formula Formula::negate(Formula f) {
  Formula out;
  out.kind_ = Kind::Not;
  out.children_.push_back(std::move(f));
  return out;
}

Formula Formula::conjunction(std::vector<Formula> children) {
  if (children.size() < 2) {
    throw InvalidArgument("And/Or need at least two children");
  }
  Formula out;
  out.kind_ = Kind::And;
  out.children_ = std::move(children);
  return out;
}

Formula Formula::disjunction(std::vector<Formula> children) {
  Formula out = conjunction(std::move(children));
  out.kind_ = Kind::Or;
  return out;
}

Formula Formula::eventually(TimeInterval window, Formula f) {
  window = TimeInterval::make(window.t1, window.t2);
  Formula out;
  out.kind_ = Kind::Eventually;
  out.window_ = window;
  out.children_.push_back(std::move(f));
  return out;
}

Formula Formula::always(TimeInterval window, Formula f) {
  Formula out = eventually(window, std::move(f));
  out.kind_ = Kind::Always;
  return out;
}

std::size_t Formula::dim() const {
  if (kind_ == Kind::Pred) return pred_.dim();
  for (const auto& c : children_) {
    if (auto d = c.dim(); d != 0) return d;
  }
  return 0;
}

int horizon(const Formula& f) {
  switch (f.kind()) {
    case Kind::True:
    case Kind::Pred:
      return 0;
    case Kind::Not:
      return horizon(f.child());
    case Kind::And:
    case Kind::Or: {
      int h = 0;
      for (const auto& c : f.children()) h = std::max(h, horizon(c));
      return h;
    }
    case Kind::Eventually:
    case Kind::Always:
      return f.window().t2 + horizon(f.child());
  }
  return 0;
}

namespace {

void check_dims(const Formula& f, std::size_t dim) {
  if (f.kind() == Kind::Pred && f.predicate().dim() != dim) {
    throw DimensionMismatch("predicates of different dimension");
  }
  for (const auto& c : f.children()) check_dims(c, dim);
}

}  // namespace

Formula conjoin(const Formula& f1, const Formula& f2) {
  const auto d1 = f1.dim();
  const auto d2 = f2.dim();
  if (d1 != 0 && d2 != 0) {
    if (d1 != d2) throw DimensionMismatch("conjoin: dimension mismatch");
    check_dims(f1, d1);
    check_dims(f2, d1);
  }
  return Formula::conjunction({f1, f2});
}

std::size_t size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& c : f.children()) n += size(c);
  return n;
}

Signal::Signal(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.empty() || values_.empty() || values_.size() % names_.size()) {
    throw DimensionMismatch("signal values do not tile the declared dimension");
  }
}

Signal Signal::from_rows(std::vector<std::string> names,
                         const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  flat.reserve(rows.size() * names.size());
  for (const auto& r : rows) {
    if (r.size() != names.size()) {
      throw DimensionMismatch("signal row has wrong length");
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Signal(std::move(names), std::move(flat));
}

}  // namespace stlgail::stl
