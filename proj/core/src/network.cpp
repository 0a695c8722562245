#include "stlgail/infer/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlgail::infer {

void NetworkShape::validate() const {
  if (n_pred < 1 || n_conj < 1 || horizon < 1) {
    throw InvalidArgument("network shape needs n_pred, n_conj, horizon >= 1");
  }
  if (dim() < 1) throw InvalidArgument("network shape needs at least one dimension");
  if (!(tau > 0.0) || !(window_sharpness > 0.0) || !(inert > 0.0)) {
    throw InvalidArgument("tau, window sharpness and inert constant must be positive");
  }
  if (static_cast<int>(predicate_dim.size()) != n_pred) {
    throw InvalidArgument("predicate_dim must have one entry per predicate");
  }
  for (int d : predicate_dim) {
    if (d < -1 || d >= dim()) throw InvalidArgument("predicate_dim out of range");
  }
}

NetworkShape NetworkShape::axis_aligned(int n_pred, int n_conj, int horizon,
                                        std::vector<std::string> dim_names,
                                        double tau) {
  NetworkShape s;
  s.n_pred = n_pred;
  s.n_conj = n_conj;
  s.horizon = horizon;
  s.tau = tau;
  s.dim_names = std::move(dim_names);
  for (int k = 0; k < n_pred; ++k) {
    s.predicate_dim.push_back(s.dim() == 0 ? -1 : k % s.dim());
  }
  s.validate();
  return s;
}

ParamLayout ParamLayout::of(const NetworkShape& shape) {
  ParamLayout l;
  const auto n_pred = static_cast<std::size_t>(shape.n_pred);
  const auto atoms = static_cast<std::size_t>(shape.n_atoms());
  const auto n_conj = static_cast<std::size_t>(shape.n_conj);
  l.a = 0;
  l.b = l.a + n_pred * static_cast<std::size_t>(shape.dim());
  l.start = l.b + n_pred;
  l.end = l.start + atoms;
  l.gate_atom = l.end + atoms;
  l.gate_conj = l.gate_atom + n_conj * atoms;
  l.total = l.gate_conj + n_conj;
  return l;
}

ad::ParamVector make_params(const NetworkShape& shape) {
  shape.validate();
  const auto n_pred = static_cast<std::size_t>(shape.n_pred);
  const auto atoms = static_cast<std::size_t>(shape.n_atoms());
  const auto n_conj = static_cast<std::size_t>(shape.n_conj);
  ad::ParamVector p;
  p.add_group("pred.a", n_pred * static_cast<std::size_t>(shape.dim()));
  p.add_group("pred.b", n_pred);
  p.add_group("window.start", atoms);
  p.add_group("window.end", atoms);
  p.add_group("gate.atom", n_conj * atoms);
  p.add_group("gate.conj", n_conj);
  return p;
}

Normalizer Normalizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

Normalizer Normalizer::fit(const stl::SignalSet& signals) {
  if (signals.empty()) throw EmptyDataset("cannot fit a normalizer to no data");
  const std::size_t dim = signals.front().signal.dim();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& ls : signals) {
    if (ls.signal.dim() != dim) throw DimensionMismatch("signals of different dimension");
    for (std::size_t t = 0; t < ls.signal.length(); ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        lo[d] = std::min(lo[d], ls.signal(t, d));
        hi[d] = std::max(hi[d], ls.signal(t, d));
      }
    }
  }
  Normalizer n;
  for (std::size_t d = 0; d < dim; ++d) {
    const double half = 0.5 * (hi[d] - lo[d]);
    n.mid.push_back(0.5 * (hi[d] + lo[d]));
    n.half.push_back(half > 0.0 ? half : 1.0);
  }
  return n;
}

std::vector<double> Normalizer::apply(const stl::Signal& s) const {
  if (s.dim() != dim()) throw DimensionMismatch("normalizer dimension mismatch");
  std::vector<double> out(s.values().size());
  const std::size_t n = dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t d = i % n;
    out[i] = (s.values()[i] - mid[d]) / half[d];
  }
  return out;
}

stl::Formula normalize_formula(const stl::Formula& f, const Normalizer& norm) {
  using stl::Formula;
  using stl::Kind;
  switch (f.kind()) {
    case Kind::True:
      return f;
    case Kind::Pred: {
      const auto& p = f.predicate();
      if (p.dim() != norm.dim()) throw DimensionMismatch("rule dimension mismatch");
      stl::Predicate q;
      q.b = p.b;
      double scale = 0.0;
      for (std::size_t d = 0; d < p.dim(); ++d) {
        q.a.push_back(p.a[d] * norm.half[d]);
        q.b -= p.a[d] * norm.mid[d];
        scale += std::abs(q.a.back());
      }
      for (auto& v : q.a) v /= scale;
      q.b /= scale;
      return Formula::pred(std::move(q));
    }
    case Kind::Not:
      return Formula::negate(normalize_formula(f.child(), norm));
    case Kind::And:
    case Kind::Or: {
      std::vector<Formula> kids;
      for (const auto& c : f.children()) kids.push_back(normalize_formula(c, norm));
      return f.kind() == Kind::And ? Formula::conjunction(std::move(kids))
                                   : Formula::disjunction(std::move(kids));
    }
    case Kind::Eventually:
      return Formula::eventually(f.window(), normalize_formula(f.child(), norm));
    case Kind::Always:
      return Formula::always(f.window(), normalize_formula(f.child(), norm));
  }
  return f;
}

double infer_robustness(const stl::Signal& s, const InferenceModel& model,
                        std::optional<double> tau) {
  const auto& shape = model.shape;
  if (static_cast<int>(s.dim()) != shape.dim()) {
    throw DimensionMismatch("signal dimension does not match the network");
  }
  if (s.last_time() < shape.horizon) {
    throw HorizonExceeded("signal shorter than the network horizon");
  }
  if (model.known_rule && stl::horizon(*model.known_rule) > s.last_time()) {
    throw HorizonExceeded("known rule horizon exceeds the signal");
  }
  const double t = tau.value_or(shape.tau);
  const Evaluator<double> net(shape, model.params.flat(), t);
  std::optional<stl::Formula> rule_n;
  if (model.known_rule) rule_n = normalize_formula(*model.known_rule, model.normalizer);
  const auto x = model.normalizer.apply(s);
  const double r = evaluate_normalized<double>(model, net, rule_n, std::span<const double>(x));
  if (!std::isfinite(r)) throw NonFiniteValue("inference output is not finite");
  return r;
}

int classify(const stl::Signal& s, const InferenceModel& model, std::optional<double> tau) {
  return infer_robustness(s, model, tau) >= 0.0 ? 1 : -1;
}

ClassifiedSignal classify_signal(stl::Signal s, const InferenceModel& model,
                                 std::optional<double> tau) {
  ClassifiedSignal out;
  out.smooth_robustness = infer_robustness(s, model, tau);
  out.predicted_label = out.smooth_robustness >= 0.0 ? 1 : -1;
  out.signal = std::move(s);
  return out;
}

}  // namespace stlgail::infer
