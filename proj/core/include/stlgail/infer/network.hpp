// Differentiable STL classifier.
//
// The network is a fixed four-layer template, DNF over temporal atoms:
//
//   predicates   p_k(t)  = a_k . x(t) - b_k                       k < n_pred
//   atoms        two per predicate, an Eventually (even j) and an Always
//                (odd j), over a soft window mask m_j(t)
//   conjunctions c_c     = smin_j [ atom_j + (1 - sig(g_cj)) L ]
//   output       r~      = smax_c [ c_c - (1 - sig(h_c)) L ]
//
// smin/smax are softmax-weighted averages at temperature tau and L is the
// inert constant: a gate with sig(g) ~ 0 pushes its term out of the min/max.
//
// Window mask of atom j with endpoints (s_j, e_j):
//   m_j(t) = sig((t - s_j + 1/2) / w) * sig((e_j + 1/2 - t) / w)
// so integer endpoints cover exactly the integer steps s_j..e_j, matching
// the rounding used by `extract_formula`.
//
// Signals are normalized per dimension to [-1, 1] before evaluation.
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "stlgail/ad/param_vector.hpp"
#include "stlgail/ad/scalar.hpp"
#include "stlgail/ad/tape.hpp"
#include "stlgail/error.hpp"
#include "stlgail/stl/formula.hpp"
#include "stlgail/stl/signal.hpp"

namespace stlgail::infer {

struct NetworkShape {
  int n_pred = 6;
  int n_conj = 2;
  int horizon = 20;  ///< T; signals need T + 1 samples
  double tau = 0.1;
  double window_sharpness = 0.04;
  double inert = 1e3;
  std::vector<std::string> dim_names;
  /// Dimension each predicate reads (axis-aligned), or -1 for a dense
  /// predicate over all dimensions.
  std::vector<int> predicate_dim;

  int dim() const noexcept { return static_cast<int>(dim_names.size()); }
  int n_atoms() const noexcept { return 2 * n_pred; }

  /// Throws InvalidArgument on an inconsistent shape.
  void validate() const;

  /// Predicates assigned round-robin over the dimensions.
  static NetworkShape axis_aligned(int n_pred, int n_conj, int horizon,
                                   std::vector<std::string> dim_names,
                                   double tau = 0.1);

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Offsets of each parameter group inside the flat parameter vector.
struct ParamLayout {
  std::size_t a = 0;          ///< n_pred x dim, row-major
  std::size_t b = 0;          ///< n_pred
  std::size_t start = 0;      ///< n_atoms window starts
  std::size_t end = 0;        ///< n_atoms window ends
  std::size_t gate_atom = 0;  ///< n_conj x n_atoms
  std::size_t gate_conj = 0;  ///< n_conj
  std::size_t total = 0;

  static ParamLayout of(const NetworkShape& shape);
};

/// Zero-initialized parameters with the groups pred.a, pred.b, window.start,
/// window.end, gate.atom, gate.conj (in this order).
ad::ParamVector make_params(const NetworkShape& shape);

/// Per-dimension affine map x -> (x - mid) / half onto [-1, 1].
struct Normalizer {
  std::vector<double> mid;
  std::vector<double> half;

  static Normalizer identity(std::size_t dim);
  /// From the per-dimension min/max over all samples of `signals`.
  static Normalizer fit(const stl::SignalSet& signals);

  std::size_t dim() const noexcept { return mid.size(); }
  std::vector<double> apply(const stl::Signal& s) const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

/// Gate logit used for a fully on (+) or fully off (-) gate.
inline constexpr double kGateSaturation = 15.0;

template <class A, class B>
using common_scalar_t =
    std::conditional_t<ad::is_var_v<A> || ad::is_var_v<B>, ad::Var, double>;

/// Evaluates the network for one parameter setting. Window masks and gate
/// offsets depend only on the parameters and are computed once.
template <class T>
class Evaluator {
 public:
  Evaluator(const NetworkShape& shape, std::span<const T> theta, double tau)
      : shape_(shape), tau_(tau), layout_(ParamLayout::of(shape)) {
    if (theta.size() != layout_.total) {
      throw DimensionMismatch("inference parameters have wrong length");
    }
    const int steps = shape.horizon + 1;
    const int atoms = shape.n_atoms();
    const double w = shape.window_sharpness;
    const double L = shape.inert;
    a_.assign(theta.begin() + layout_.a, theta.begin() + layout_.b);
    b_.assign(theta.begin() + layout_.b, theta.begin() + layout_.start);
    mask_.reserve(static_cast<std::size_t>(atoms * steps));
    for (int j = 0; j < atoms; ++j) {
      const T& s = theta[layout_.start + j];
      const T& e = theta[layout_.end + j];
      for (int t = 0; t < steps; ++t) {
        const double tt = static_cast<double>(t);
        mask_.push_back(ad::sigmoid((T(tt + 0.5) - s) / T(w)) *
                        ad::sigmoid((e + T(0.5 - tt)) / T(w)));
      }
    }
    atom_offset_.reserve(static_cast<std::size_t>(shape.n_conj * atoms));
    for (int c = 0; c < shape.n_conj; ++c) {
      for (int j = 0; j < atoms; ++j) {
        const T& g = theta[layout_.gate_atom + c * atoms + j];
        atom_offset_.push_back((T(1.0) - ad::sigmoid(g)) * T(L));
      }
    }
    for (int c = 0; c < shape.n_conj; ++c) {
      const T& h = theta[layout_.gate_conj + c];
      conj_offset_.push_back((T(1.0) - ad::sigmoid(h)) * T(L));
    }
    // Terms behind a gate at the saturated-off value carry softmax weight
    // exp(-L / tau) == 0 and are skipped. Empty selections are TRUE (value L),
    // as in extract_formula.
    auto off = [](const T& g) { return ad::value_of(g) <= -kGateSaturation; };
    conj_live_.assign(static_cast<std::size_t>(shape.n_conj), 1);
    conj_empty_.assign(static_cast<std::size_t>(shape.n_conj), 0);
    term_live_.assign(static_cast<std::size_t>(shape.n_conj * atoms), 1);
    atom_live_.assign(static_cast<std::size_t>(atoms), 0);
    for (int c = 0; c < shape.n_conj; ++c) {
      if (off(theta[layout_.gate_conj + c])) conj_live_[c] = 0;
      bool any_atom = false;
      for (int j = 0; j < atoms; ++j) {
        const bool live = !off(theta[layout_.gate_atom + c * atoms + j]);
        term_live_[c * atoms + j] = live ? 1 : 0;
        any_atom = any_atom || live;
        if (live && conj_live_[c]) atom_live_[j] = 1;
      }
      conj_empty_[c] = any_atom ? 0 : 1;
    }
  }

  /// `x` is the normalized signal, row-major with `dim` columns and at least
  /// horizon + 1 rows.
  template <class S>
  common_scalar_t<T, S> operator()(std::span<const S> x) const {
    using R = common_scalar_t<T, S>;
    const int atoms = shape_.n_atoms();
    std::vector<R> trace(static_cast<std::size_t>(shape_.horizon + 1));
    std::vector<R> atom(static_cast<std::size_t>(atoms));
    for (int k = 0; k < shape_.n_pred; ++k) {
      if (!atom_live_[2 * k] && !atom_live_[2 * k + 1]) continue;
      predicate_trace(x, k, std::span<R>(trace));
      for (int j = 2 * k; j < 2 * k + 2; ++j) {
        if (atom_live_[j]) atom[j] = atom_from_trace(std::span<const R>(trace), j);
      }
    }
    return combine(std::span<const R>(atom));
  }

  /// Value of atom `j` alone, whether or not any gate selects it.
  template <class S>
  common_scalar_t<T, S> atom_value(std::span<const S> x, int j) const {
    using R = common_scalar_t<T, S>;
    std::vector<R> trace(static_cast<std::size_t>(shape_.horizon + 1));
    predicate_trace(x, j / 2, std::span<R>(trace));
    return atom_from_trace(std::span<const R>(trace), j);
  }

  /// Gated conjunction/disjunction layers over precomputed atom values.
  /// Entries of atoms no live gate reads are ignored.
  template <class R>
  R combine(std::span<const R> atom) const {
    const int atoms = shape_.n_atoms();
    std::vector<R> terms;
    std::vector<R> conj;
    terms.reserve(static_cast<std::size_t>(atoms));
    for (int c = 0; c < shape_.n_conj; ++c) {
      if (!conj_live_[c]) continue;
      if (conj_empty_[c]) {
        conj.push_back(R(shape_.inert) - R(conj_offset_[c]));
        continue;
      }
      terms.clear();
      for (int j = 0; j < atoms; ++j) {
        if (term_live_[c * atoms + j]) {
          terms.push_back(atom[j] + R(atom_offset_[c * atoms + j]));
        }
      }
      conj.push_back(ad::smooth_min(std::span<const R>(terms), tau_) - R(conj_offset_[c]));
    }
    if (conj.empty()) return R(shape_.inert);
    return ad::smooth_max(std::span<const R>(conj), tau_);
  }

  const NetworkShape& shape() const noexcept { return shape_; }
  double tau() const noexcept { return tau_; }

 private:
  template <class S, class R>
  void predicate_trace(std::span<const S> x, int k, std::span<R> trace) const {
    const int dim = shape_.dim();
    const int pd = shape_.predicate_dim[k];
    for (int t = 0; t <= shape_.horizon; ++t) {
      R acc = R(0.0) - R(b_[k]);
      if (pd >= 0) {
        acc = R(a_[k * dim + pd]) * R(x[t * dim + pd]) + acc;
      } else {
        for (int d = 0; d < dim; ++d) acc = R(a_[k * dim + d]) * R(x[t * dim + d]) + acc;
      }
      trace[t] = acc;
    }
  }

  template <class R>
  R atom_from_trace(std::span<const R> trace, int j) const {
    const int steps = shape_.horizon + 1;
    const double L = shape_.inert;
    std::vector<R> vals(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
      const R m = R(mask_[j * steps + t]);
      vals[t] = j % 2 == 0 ? trace[t] * m + (m - R(1.0)) * R(L)
                           : trace[t] * m + (R(1.0) - m) * R(L);
    }
    return j % 2 == 0 ? ad::smooth_max(std::span<const R>(vals), tau_)
                      : ad::smooth_min(std::span<const R>(vals), tau_);
  }

  NetworkShape shape_;
  double tau_;
  ParamLayout layout_;
  std::vector<T> a_;
  std::vector<T> b_;
  std::vector<T> mask_;
  std::vector<T> atom_offset_;
  std::vector<T> conj_offset_;
  std::vector<char> conj_live_;
  std::vector<char> conj_empty_;
  std::vector<char> term_live_;
  std::vector<char> atom_live_;
};

/// Smooth robustness of a fixed formula over a normalized signal, using the
/// same smooth min/max as the network. Predicates must already be expressed
/// in normalized coordinates (see `normalize_formula`).
template <class S>
S smooth_robustness(const stl::Formula& f, std::span<const S> x, int dim, int t,
                    double tau) {
  using stl::Kind;
  switch (f.kind()) {
    case Kind::True:
      return S(1e9);
    case Kind::Pred: {
      const auto& p = f.predicate();
      S acc = S(0.0) - S(p.b);
      for (int d = 0; d < dim; ++d) {
        if (p.a[d] != 0.0) acc = S(p.a[d]) * x[t * dim + d] + acc;
      }
      return acc;
    }
    case Kind::Not:
      return S(0.0) - smooth_robustness(f.child(), x, dim, t, tau);
    case Kind::And:
    case Kind::Or: {
      std::vector<S> parts;
      for (const auto& c : f.children()) {
        parts.push_back(smooth_robustness(c, x, dim, t, tau));
      }
      return f.kind() == Kind::And ? ad::smooth_min(std::span<const S>(parts), tau)
                                   : ad::smooth_max(std::span<const S>(parts), tau);
    }
    case Kind::Eventually:
    case Kind::Always: {
      std::vector<S> parts;
      for (int u = t + f.window().t1; u <= t + f.window().t2; ++u) {
        parts.push_back(smooth_robustness(f.child(), x, dim, u, tau));
      }
      return f.kind() == Kind::Always ? ad::smooth_min(std::span<const S>(parts), tau)
                                      : ad::smooth_max(std::span<const S>(parts), tau);
    }
  }
  return S(0.0);
}

/// Rewrites every predicate of a raw-unit formula into normalized
/// coordinates, scaled to unit L1 norm. Signs of all robustness values are
/// preserved.
stl::Formula normalize_formula(const stl::Formula& f, const Normalizer& norm);

/// Parameters plus everything needed to apply them to raw signals.
struct InferenceModel {
  NetworkShape shape;
  Normalizer normalizer;
  ad::ParamVector params;
  /// User formula (raw units) conjoined with the network output.
  std::optional<stl::Formula> known_rule;
};

/// Network output on an already normalized signal. When the model carries a
/// known rule, the result is smin(network, rule).
template <class S>
common_scalar_t<double, S> evaluate_normalized(const InferenceModel& model,
                                               const Evaluator<double>& net,
                                               const std::optional<stl::Formula>& rule_n,
                                               std::span<const S> x) {
  using R = common_scalar_t<double, S>;
  R out = net(x);
  if (rule_n) {
    std::vector<R> rx(x.begin(), x.end());
    const R r = smooth_robustness<R>(*rule_n, std::span<const R>(rx),
                                     model.shape.dim(), 0, net.tau());
    const R both[2] = {out, r};
    out = ad::smooth_min(std::span<const R>(both, 2), net.tau());
  }
  return out;
}

/// Smooth robustness of `s` (raw units). `tau` defaults to the shape's.
/// Throws HorizonExceeded, DimensionMismatch or NonFiniteValue.
double infer_robustness(const stl::Signal& s, const InferenceModel& model,
                        std::optional<double> tau = std::nullopt);

/// +1 iff infer_robustness >= 0.
int classify(const stl::Signal& s, const InferenceModel& model,
             std::optional<double> tau = std::nullopt);

struct ClassifiedSignal {
  stl::Signal signal;
  double smooth_robustness = 0.0;
  int predicted_label = 1;
};

ClassifiedSignal classify_signal(stl::Signal s, const InferenceModel& model,
                                 std::optional<double> tau = std::nullopt);

}  // namespace stlgail::infer
