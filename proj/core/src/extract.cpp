#include "stlgail/infer/extract.hpp"

#include <algorithm>
#include <cmath>

#include "stlgail/ad/scalar.hpp"
#include "stlgail/log.hpp"
#include "stlgail/train/mcr.hpp"

namespace stlgail::infer {
namespace {

stl::Formula make_predicate(const InferenceModel& model, const ParamLayout& layout,
                            int k, bool canonical) {
  const auto theta = model.params.flat();
  const int dim = model.shape.dim();
  const auto& norm = model.normalizer;
  stl::Predicate p;
  p.b = theta[layout.b + k];
  int support = 0;
  int last = -1;
  for (int d = 0; d < dim; ++d) {
    const double a = theta[layout.a + k * dim + d];
    p.a.push_back(a / norm.half[d]);
    p.b += a * norm.mid[d] / norm.half[d];
    if (p.a.back() != 0.0) {
      ++support;
      last = d;
    }
  }
  if (support == 0) {
    return -p.b >= 0.0 ? stl::Formula::truth()
                       : stl::Formula::negate(stl::Formula::truth());
  }
  if (canonical && support == 1) {
    const double a = p.a[last];
    auto f = stl::Formula::pred(p.dim(), static_cast<std::size_t>(last), p.b / a);
    return a > 0.0 ? f : stl::Formula::negate(std::move(f));
  }
  return stl::Formula::pred(std::move(p));
}

stl::Formula collapse(std::vector<stl::Formula> parts, bool conj) {
  if (parts.size() == 1) return std::move(parts.front());
  return conj ? stl::Formula::conjunction(std::move(parts))
              : stl::Formula::disjunction(std::move(parts));
}

// Every formula obtained by removing one child of one And/Or node, in
// pre-order.
void deletions(const stl::Formula& f, std::vector<stl::Formula>& out) {
  using stl::Formula;
  using stl::Kind;
  switch (f.kind()) {
    case Kind::True:
    case Kind::Pred:
      return;
    case Kind::Not:
    case Kind::Eventually:
    case Kind::Always: {
      std::vector<Formula> inner;
      deletions(f.child(), inner);
      for (auto& g : inner) {
        if (f.kind() == Kind::Not) {
          out.push_back(Formula::negate(std::move(g)));
        } else if (f.kind() == Kind::Eventually) {
          out.push_back(Formula::eventually(f.window(), std::move(g)));
        } else {
          out.push_back(Formula::always(f.window(), std::move(g)));
        }
      }
      return;
    }
    case Kind::And:
    case Kind::Or: {
      const bool conj = f.kind() == Kind::And;
      const auto& kids = f.children();
      for (std::size_t i = 0; i < kids.size(); ++i) {
        std::vector<Formula> rest;
        for (std::size_t j = 0; j < kids.size(); ++j) {
          if (j != i) rest.push_back(kids[j]);
        }
        out.push_back(collapse(std::move(rest), conj));
      }
      for (std::size_t i = 0; i < kids.size(); ++i) {
        std::vector<Formula> inner;
        deletions(kids[i], inner);
        for (auto& g : inner) {
          auto copy = kids;
          copy[i] = std::move(g);
          out.push_back(collapse(std::move(copy), conj));
        }
      }
      return;
    }
  }
}

}  // namespace

stl::TimeInterval rounded_window(double s, double e, int horizon) {
  const int t1 = std::clamp(static_cast<int>(std::lround(s)), 0, horizon);
  const int t2 = std::clamp(static_cast<int>(std::lround(e)), t1, horizon);
  return {t1, t2};
}

stl::Formula extract_formula(const InferenceModel& model, double gate_threshold,
                             bool canonical) {
  if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) {
    throw InvalidArgument("gate threshold must lie in (0, 1)");
  }
  const auto& shape = model.shape;
  const auto layout = ParamLayout::of(shape);
  const auto theta = model.params.flat();
  if (theta.size() != layout.total) throw DimensionMismatch("parameter layout mismatch");
  const int atoms = shape.n_atoms();

  std::vector<stl::Formula> disjuncts;
  for (int c = 0; c < shape.n_conj; ++c) {
    if (ad::sigmoid(theta[layout.gate_conj + c]) <= gate_threshold) continue;
    std::vector<stl::Formula> conjuncts;
    for (int j = 0; j < atoms; ++j) {
      if (ad::sigmoid(theta[layout.gate_atom + c * atoms + j]) <= gate_threshold) continue;
      const auto w = rounded_window(theta[layout.start + j], theta[layout.end + j],
                                    shape.horizon);
      auto p = make_predicate(model, layout, j / 2, canonical);
      conjuncts.push_back(j % 2 == 0 ? stl::Formula::eventually(w, std::move(p))
                                     : stl::Formula::always(w, std::move(p)));
    }
    if (conjuncts.empty()) {
      conjuncts.push_back(stl::Formula::truth());
    }
    disjuncts.push_back(collapse(std::move(conjuncts), true));
  }
  if (disjuncts.empty()) {
    log_warn("no conjunction passes the gate threshold; extracted TRUE");
    return stl::Formula::truth();
  }
  return collapse(std::move(disjuncts), false);
}

void harden(ad::ParamVector& params, const NetworkShape& shape, double gate_threshold) {
  const auto layout = ParamLayout::of(shape);
  auto theta = params.flat();
  if (theta.size() != layout.total) throw DimensionMismatch("parameter layout mismatch");
  for (int j = 0; j < shape.n_atoms(); ++j) {
    const auto w = rounded_window(theta[layout.start + j], theta[layout.end + j],
                                  shape.horizon);
    theta[layout.start + j] = w.t1;
    theta[layout.end + j] = w.t2;
  }
  for (std::size_t i = layout.gate_atom; i < layout.total; ++i) {
    theta[i] = ad::sigmoid(theta[i]) > gate_threshold ? kGateSaturation : -kGateSaturation;
  }
}

stl::Formula simplify(const stl::Formula& f, const stl::SignalSet& data) {
  if (data.empty()) return f;
  stl::Formula current = f;
  double best = train::mcr(current, data);
  for (;;) {
    std::vector<stl::Formula> candidates;
    deletions(current, candidates);
    bool changed = false;
    for (auto& cand : candidates) {
      const double m = train::mcr(cand, data);
      if (m <= best) {
        best = m;
        current = std::move(cand);
        changed = true;
        break;
      }
    }
    if (!changed) return current;
  }
}

}  // namespace stlgail::infer
