#include "stlgail/train/inference_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "stlgail/ad/adam.hpp"
#include "stlgail/ad/tape.hpp"
#include "stlgail/error.hpp"
#include "stlgail/infer/extract.hpp"
#include "stlgail/log.hpp"

namespace stlgail::train {

using infer::Evaluator;
using infer::kGateSaturation;
using infer::NetworkShape;
using infer::ParamLayout;

void InferenceTrainConfig::validate() const {
  if (!(margin > 0.0)) throw ConfigError("margin must be > 0");
  if (!(margin_min > 0.0) || !(margin_min <= margin_max)) {
    throw ConfigError("margin bounds must satisfy 0 < min <= max");
  }
  if (!(beta1 >= 0.0) || !(beta2 >= 0.0)) throw ConfigError("beta1, beta2 must be >= 0");
  if (!(initial_temperature > 0.0)) throw ConfigError("initial temperature must be > 0");
  if (!(cooling > 0.0 && cooling <= 1.0)) throw ConfigError("cooling must be in (0, 1]");
  if (epoch < 1 || max_proposals < 0 || refine_steps < 0) {
    throw ConfigError("annealing budget must be non-negative with epoch >= 1");
  }
  if (!(acceptance_q < 1.0)) throw ConfigError("acceptance_q must be < 1");
  if (!(visit_scale > 0.0) || !(refine_step_size > 0.0)) {
    throw ConfigError("visit scale and refinement step must be > 0");
  }
  if (!(coef_bound > 0.0) || !(offset_bound > 0.0)) throw ConfigError("bounds must be > 0");
}

NormalizedData NormalizedData::make(const stl::SignalSet& data, const infer::Normalizer& norm,
                                    const std::optional<stl::Formula>& rule, double tau) {
  NormalizedData out;
  out.dim = static_cast<int>(norm.dim());
  std::optional<stl::Formula> rule_n;
  if (rule) rule_n = infer::normalize_formula(*rule, norm);
  for (const auto& ls : data) {
    out.x.push_back(norm.apply(ls.signal));
    out.label.push_back(ls.label);
    if (rule_n) {
      out.rule.push_back(infer::smooth_robustness<double>(
          *rule_n, std::span<const double>(out.x.back()), out.dim, 0, tau));
    }
  }
  return out;
}

double inference_loss(const stl::SignalSet& data, const infer::InferenceModel& model,
                      double margin, const InferenceTrainConfig& cfg) {
  const auto nd = NormalizedData::make(data, model.normalizer, model.known_rule, model.shape.tau);
  return inference_loss<double>(nd, model.shape, model.params.flat(), margin, cfg);
}

LossGradient inference_loss_gradient(const NormalizedData& data, const NetworkShape& shape,
                                     std::span<const double> theta, double margin,
                                     const InferenceTrainConfig& cfg) {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const auto th = tape.variables(theta);
  const ad::Var eps = tape.variable(margin);
  const ad::Var loss = inference_loss<ad::Var>(data, shape, th, eps, cfg);
  std::vector<ad::Var> wrt(th);
  wrt.push_back(eps);
  auto g = tape.gradient(loss, wrt);
  LossGradient out;
  out.loss = loss.value();
  out.margin = g.back();
  g.pop_back();
  out.params = std::move(g);
  return out;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
}

/// a_k . x(t) for normalized sample `x`.
double predicate_value(const NormalizedData& data, const NetworkShape& shape,
                       std::span<const double> theta, const ParamLayout& lay, std::size_t i,
                       int k, int t) {
  const int dim = data.dim;
  const int pd = shape.predicate_dim[k];
  const double* a = theta.data() + lay.a + k * dim;
  const double* x = data.x[i].data() + t * dim;
  if (pd >= 0) return a[pd] * x[pd];
  double acc = 0.0;
  for (int d = 0; d < dim; ++d) acc += a[d] * x[d];
  return acc;
}

class Annealer {
 public:
  Annealer(const NormalizedData& data, const NetworkShape& shape,
           const InferenceTrainConfig& cfg, Rng& rng)
      : data_(data), shape_(shape), cfg_(cfg), rng_(rng), lay_(ParamLayout::of(shape)) {
    const int dim = data.dim;
    for (int k = 0; k < shape.n_pred; ++k) {
      const int pd = shape.predicate_dim[k];
      for (int d = 0; d < dim; ++d) {
        if (pd < 0 || pd == d) continuous_.push_back(lay_.a + k * dim + d);
      }
      continuous_.push_back(lay_.b + k);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      // Negatives the known rule already rejects need no atom.
      if (data.label[i] > 0) {
        positives_.push_back(i);
      } else if (data.rule.empty() || data.rule[i] >= 0.0) {
        negatives_.push_back(i);
      }
    }
    open_neg_.assign(data.size(), 0);
    for (std::size_t i : negatives_) open_neg_[i] = 1;
  }

  void reset(std::vector<double> theta, double eps) {
    theta_ = std::move(theta);
    eps_ = eps;
    clamp(theta_, eps_);
    const Evaluator<double> net(shape_, std::span<const double>(theta_), shape_.tau);
    const auto A = static_cast<std::size_t>(shape_.n_atoms());
    atoms_.assign(data_.size() * A, 0.0);
    std::vector<int> all(A);
    for (std::size_t j = 0; j < A; ++j) all[j] = static_cast<int>(j);
    fill_atoms(net, all, atoms_);
    loss_ = loss_of(net, theta_, eps_, atoms_);
  }

  double loss() const noexcept { return loss_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  double eps() const noexcept { return eps_; }

  /// One proposal with generalized Metropolis acceptance at temperature T.
  bool propose(double T, double T0) {
    std::vector<double> cand;
    double cand_eps = eps_;
    std::vector<double> cand_atoms;
    double cand_loss = 0.0;
    if (rng_.uniform() < kAtomMove) {
      cand_loss = best_atom_proposal(cand, cand_atoms);
    } else {
      cand = theta_;
      std::vector<int> touched;
      move(cand, cand_eps, touched, T / T0);
      clamp(cand, cand_eps);
      cand_loss = evaluate(cand, cand_eps, touched, cand_atoms);
    }
    if (!accept(cand_loss - loss_, T)) return false;
    theta_.swap(cand);
    eps_ = cand_eps;
    atoms_.swap(cand_atoms);
    loss_ = cand_loss;
    return true;
  }

  /// Adam on the continuous coordinates; ends at the best point visited.
  void refine() {
    if (cfg_.refine_steps == 0) return;
    std::vector<std::size_t> vars = continuous_;
    ad::Adam adam(vars.size() + (cfg_.learn_margin ? 1 : 0),
                  {cfg_.refine_step_size, 0.9, 0.999, 1e-8});
    std::vector<double> theta = theta_;
    double eps = eps_;
    std::vector<double> best_theta = theta;
    double best_eps = eps;
    double best_loss = loss_;
    ad::Tape tape;
    std::vector<double> values(adam_size(vars));
    for (int s = 0; s <= cfg_.refine_steps; ++s) {
      tape.clear();
      ad::TapeScope scope(tape);
      std::vector<ad::Var> th(theta.begin(), theta.end());
      std::vector<ad::Var> wrt;
      for (std::size_t i : vars) {
        th[i] = tape.variable(theta[i]);
        wrt.push_back(th[i]);
      }
      ad::Var e(eps);
      if (cfg_.learn_margin) {
        e = tape.variable(eps);
        wrt.push_back(e);
      }
      const ad::Var L = inference_loss<ad::Var>(data_, shape_, th, e, cfg_);
      if (L.value() < best_loss) {
        best_loss = L.value();
        best_theta = theta;
        best_eps = eps;
      }
      if (s == cfg_.refine_steps) break;
      const auto g = tape.gradient(L, wrt);
      for (std::size_t v = 0; v < vars.size(); ++v) values[v] = theta[vars[v]];
      if (cfg_.learn_margin) values.back() = eps;
      adam.step(values, g);
      for (std::size_t v = 0; v < vars.size(); ++v) theta[vars[v]] = values[v];
      if (cfg_.learn_margin) eps = values.back();
      clamp(theta, eps);
    }
    reset(std::move(best_theta), best_eps);
  }

 private:
  static constexpr double kAtomMove = 0.22;
  static constexpr int kAtomCandidates = 8;
  static constexpr double kSplitShare = 0.25;
  static constexpr double kCoverShare = 0.25;
  static constexpr int kCoverCandidates = 40;
  static constexpr int kCoverMaxAtoms = 4;

  double evaluate(const std::vector<double>& theta, double eps, const std::vector<int>& touched,
                  std::vector<double>& atoms) const {
    const Evaluator<double> net(shape_, std::span<const double>(theta), shape_.tau);
    atoms = atoms_;
    fill_atoms(net, touched, atoms);
    return loss_of(net, theta, eps, atoms);
  }

  /// Lowest-loss of several data-driven atom, split and cover proposals.
  double best_atom_proposal(std::vector<double>& best, std::vector<double>& best_atoms) {
    double best_loss = std::numeric_limits<double>::infinity();
    for (int n = 0; n < kAtomCandidates; ++n) {
      std::vector<double> cand = theta_;
      std::vector<int> touched;
      const double u = rng_.uniform();
      if (u < kCoverShare) {
        propose_cover(cand, touched);
      } else if (u < kCoverShare + kSplitShare) {
        propose_split(cand, touched);
      } else {
        propose_atom(cand, touched);
      }
      double e = eps_;
      clamp(cand, e);
      std::vector<double> atoms;
      const double l = evaluate(cand, e, touched, atoms);
      if (l < best_loss) {
        best_loss = l;
        best.swap(cand);
        best_atoms.swap(atoms);
      }
    }
    return best_loss;
  }

  std::size_t adam_size(const std::vector<std::size_t>& vars) const {
    return vars.size() + (cfg_.learn_margin ? 1 : 0);
  }

  void clamp(std::vector<double>& theta, double& eps) const {
    const int dim = data_.dim;
    for (int k = 0; k < shape_.n_pred; ++k) {
      const int pd = shape_.predicate_dim[k];
      for (int d = 0; d < dim; ++d) {
        double& a = theta[lay_.a + k * dim + d];
        a = (pd < 0 || pd == d) ? std::clamp(a, -cfg_.coef_bound, cfg_.coef_bound) : 0.0;
      }
      double& b = theta[lay_.b + k];
      b = std::clamp(b, -cfg_.offset_bound, cfg_.offset_bound);
    }
    eps = cfg_.learn_margin ? std::clamp(eps, cfg_.margin_min, cfg_.margin_max) : cfg_.margin;
  }

  void fill_atoms(const Evaluator<double>& net, const std::vector<int>& js,
                  std::vector<double>& atoms) const {
    const auto A = static_cast<std::size_t>(shape_.n_atoms());
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const std::span<const double> x(data_.x[i]);
      for (int j : js) atoms[i * A + j] = net.atom_value(x, j);
    }
  }

  double loss_of(const Evaluator<double>& net, const std::vector<double>& theta, double eps,
                 const std::vector<double>& atoms) const {
    const auto A = static_cast<std::size_t>(shape_.n_atoms());
    double fit = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      double r = net.combine(std::span<const double>(atoms.data() + i * A, A));
      if (!data_.rule.empty()) {
        const double both[2] = {r, data_.rule[i]};
        r = ad::smooth_min(std::span<const double>(both, 2), shape_.tau);
      }
      fit += std::max(0.0, eps - static_cast<double>(data_.label[i]) * r);
    }
    double reg = 0.0;
    for (std::size_t g = lay_.gate_atom; g < lay_.total; ++g) reg += ad::sigmoid(theta[g]);
    return fit / static_cast<double>(data_.size()) + cfg_.beta1 * reg - cfg_.beta2 * eps;
  }

  bool accept(double delta, double T) {
    if (delta <= 0.0) return true;
    const double q = 1.0 - cfg_.acceptance_q;
    const double base = 1.0 - q * delta / T;
    if (base <= 0.0) return false;
    return rng_.uniform() < std::pow(base, 1.0 / q);
  }

  void move(std::vector<double>& theta, double& eps, std::vector<int>& touched, double heat) {
    const int atoms = shape_.n_atoms();
    const int T = shape_.horizon;
    const double u = rng_.uniform();
    if (u < 0.45) {
      // Cauchy visit on one continuous coordinate.
      const std::size_t n = continuous_.size() + (cfg_.learn_margin ? 1 : 0);
      const auto pick = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(n) - 1));
      const double step = cfg_.visit_scale * heat * rng_.cauchy();
      if (pick == continuous_.size()) {
        eps += 0.3 * step;
        return;
      }
      const std::size_t idx = continuous_[pick];
      theta[idx] += step;
      const int k = idx >= lay_.b ? static_cast<int>(idx - lay_.b)
                                  : static_cast<int>((idx - lay_.a) / data_.dim);
      touched = {2 * k, 2 * k + 1};
    } else if (u < 0.51) {
      // Negate a predicate.
      const int k = rng_.uniform_int(0, shape_.n_pred - 1);
      for (int d = 0; d < data_.dim; ++d) theta[lay_.a + k * data_.dim + d] *= -1.0;
      theta[lay_.b + k] *= -1.0;
      touched = {2 * k, 2 * k + 1};
    } else if (u < 0.74) {
      // Window endpoint on the integer lattice.
      const int j = rng_.uniform_int(0, atoms - 1);
      double& s = theta[lay_.start + j];
      double& e = theta[lay_.end + j];
      double& end = rng_.bernoulli(0.5) ? s : e;
      if (rng_.bernoulli(0.5)) {
        end = rng_.uniform_int(0, T);
      } else {
        const double jump = std::clamp(rng_.cauchy() * std::max(1.0, 0.2 * T * heat), -2.0 * T,
                                       2.0 * T);
        end = std::clamp(std::round(end + (jump >= 0 ? std::ceil(jump) : std::floor(jump))),
                         0.0, static_cast<double>(T));
      }
      if (s > e) std::swap(s, e);
      touched = {j};
    } else {
      // Gate flip.
      const auto n = static_cast<int>(lay_.total - lay_.gate_atom);
      double& g = theta[lay_.gate_atom + rng_.uniform_int(0, n - 1)];
      g = g > 0.0 ? -kGateSaturation : kGateSaturation;
    }
  }

  /// Switches on atom j in conjunction c (sometimes as its only atom) with
  /// a random window and a threshold between a low quantile of the
  /// positives and the negatives below it.
  void propose_atom(std::vector<double>& theta, std::vector<int>& touched) {
    const int c = rng_.uniform_int(0, shape_.n_conj - 1);
    const bool alone = rng_.bernoulli(0.25);
    // A rebuilt conjunction targets the positives no other conjunction
    // accepts; a tightened one keeps those it accepts now.
    auto pool = alone ? uncovered_positives(c) : covered_positives(c);
    if (pool.empty()) pool = positives_;
    std::vector<std::size_t> dropped;
    const double q = alone ? rng_.uniform(0.0, 0.6) : rng_.uniform(0.0, 0.15);
    const int j = set_atom(theta, c, alone, pool, q, &dropped);
    touched = {j & ~1, j | 1};
    if (!alone || rng_.bernoulli(0.3)) return;
    // Rebuilt conjunctions get a second atom over the positives still kept.
    std::vector<std::size_t> kept;
    std::set_difference(pool.begin(), pool.end(), dropped.begin(), dropped.end(),
                        std::back_inserter(kept));
    const int j2 = other_atom(j);
    if (j2 < 0 || kept.empty()) return;
    set_atom(theta, c, false, kept, rng_.uniform(0.0, 0.15), nullptr, j2);
    touched.push_back(j2 & ~1);
    touched.push_back(j2 | 1);
  }

  /// Whether live conjunction c accepts sample i at the current point.
  bool accepts(int c, std::size_t i) const {
    const int atoms = shape_.n_atoms();
    if (theta_[lay_.gate_conj + c] <= 0.0) return false;
    for (int j = 0; j < atoms; ++j) {
      if (theta_[lay_.gate_atom + c * atoms + j] > 0.0 &&
          atoms_[i * static_cast<std::size_t>(atoms) + j] <= 0.0) {
        return false;
      }
    }
    return true;
  }

  std::vector<std::size_t> covered_positives(int c) const {
    std::vector<std::size_t> out;
    for (std::size_t i : positives_) {
      if (accepts(c, i)) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> uncovered_positives(int c) const {
    std::vector<std::size_t> out;
    for (std::size_t i : positives_) {
      bool hit = false;
      for (int o = 0; o < shape_.n_conj && !hit; ++o) hit = o != c && accepts(o, i);
      if (!hit) out.push_back(i);
    }
    return out;
  }

  /// A random atom on a different predicate than atom j, or -1.
  int other_atom(int j) {
    if (shape_.n_pred < 2) return -1;
    int j2 = j;
    while (j2 / 2 == j / 2) j2 = rng_.uniform_int(0, shape_.n_atoms() - 1);
    return j2;
  }

  /// Copies a live conjunction into another slot, tightens the original
  /// with an atom that keeps only part of the positives and gives the copy
  /// an atom fitted to the positives the first one drops.
  void propose_split(std::vector<double>& theta, std::vector<int>& touched) {
    const int atoms = shape_.n_atoms();
    std::vector<int> live;
    for (int c = 0; c < shape_.n_conj; ++c) {
      if (theta[lay_.gate_conj + c] > 0.0) live.push_back(c);
    }
    if (live.empty() || shape_.n_conj < 2) {
      propose_atom(theta, touched);
      return;
    }
    const int c = live[static_cast<std::size_t>(rng_.uniform_int(0, static_cast<int>(live.size()) - 1))];
    int c2 = rng_.uniform_int(0, shape_.n_conj - 2);
    if (c2 >= c) ++c2;
    for (int jj = 0; jj < atoms; ++jj) {
      theta[lay_.gate_atom + c2 * atoms + jj] = theta[lay_.gate_atom + c * atoms + jj];
    }
    theta[lay_.gate_conj + c2] = kGateSaturation;
    auto pool = covered_positives(c);
    if (pool.empty()) pool = positives_;
    std::vector<std::size_t> dropped;
    const int j1 = set_atom(theta, c, false, pool, rng_.uniform(0.1, 0.8), &dropped);
    touched = {j1 & ~1, j1 | 1};
    if (dropped.empty()) return;
    const int j2 = other_atom(j1);
    if (j2 < 0) return;
    set_atom(theta, c2, false, dropped, rng_.uniform(0.0, 0.15), nullptr, j2);
    touched.push_back(j2 & ~1);
    touched.push_back(j2 | 1);
  }

  /// A candidate atom: predicate k = j / 2 along `sign` times its unit
  /// direction, window [s, e], threshold b, coefficient scale.
  struct AtomChoice {
    int j = 0;
    double sign = 1.0;
    int s = 0;
    int e = 0;
    double b = 0.0;
    double scale = 1.0;
  };

  /// sign * unit direction of predicate k applied to sample i at time t.
  double unit_value(int k, double sign, std::size_t i, int t) const {
    const int dim = data_.dim;
    const int pd = shape_.predicate_dim[k];
    const double* x = data_.x[i].data() + t * dim;
    if (pd >= 0) return sign * x[pd];
    double acc = 0.0;
    for (int d = 0; d < dim; ++d) acc += x[d];
    return sign * acc / static_cast<double>(dim);
  }

  /// Max (F) or min (G) of the unit predicate over the window.
  double window_stat(const AtomChoice& a, std::size_t i) const {
    const bool ev = a.j % 2 == 0;
    double v = ev ? -1e300 : 1e300;
    for (int t = a.s; t <= a.e; ++t) {
      const double p = unit_value(a.j / 2, a.sign, i, t);
      v = ev ? std::max(v, p) : std::min(v, p);
    }
    return v;
  }

  /// Random direction and window (kept, full, suffix or arbitrary) for atom
  /// j, with the threshold between the `q` quantile of `pos` and the
  /// negatives below it.
  AtomChoice make_atom(const std::vector<double>& theta, int j,
                       const std::vector<std::size_t>& pos, double q) {
    const int T = shape_.horizon;
    AtomChoice a;
    a.j = j;
    a.sign = rng_.bernoulli(0.5) ? 1.0 : -1.0;
    const auto w = infer::rounded_window(theta[lay_.start + j], theta[lay_.end + j], T);
    a.s = w.t1;
    a.e = w.t2;
    const double u = rng_.uniform();
    if (u < 0.25) {
      a.s = 0;
      a.e = T;
    } else if (u < 0.5) {
      a.s = rng_.uniform_int(0, T);
      a.e = T;
    } else if (u < 0.75) {
      a.s = rng_.uniform_int(0, T);
      a.e = rng_.uniform_int(0, T);
      if (a.s > a.e) std::swap(a.s, a.e);
    }
    std::vector<double> ps;
    ps.reserve(pos.size());
    for (std::size_t i : pos) ps.push_back(window_stat(a, i));
    const double hi = ps.empty() ? 0.0 : quantile(std::move(ps), q);
    double lo = hi - 2.0;
    for (std::size_t i : negatives_) {
      const double v = window_stat(a, i);
      if (v < hi) lo = std::max(lo, v);
    }
    a.b = 0.5 * (hi + lo);
    a.scale = std::clamp(2.0 * eps_ / std::max(hi - lo, 1e-6), 1.0, cfg_.coef_bound);
    return a;
  }

  /// Writes the atom's predicate and window and switches it on in
  /// conjunction c (alone: as its only atom).
  void apply_atom(std::vector<double>& theta, const AtomChoice& a, int c, bool alone) const {
    const int atoms = shape_.n_atoms();
    const int dim = data_.dim;
    const int k = a.j / 2;
    const int pd = shape_.predicate_dim[k];
    for (int d = 0; d < dim; ++d) {
      const double unit = pd >= 0 ? (d == pd ? 1.0 : 0.0) : 1.0 / static_cast<double>(dim);
      theta[lay_.a + k * dim + d] = a.sign * unit * a.scale;
    }
    theta[lay_.b + k] = a.b * a.scale;
    theta[lay_.start + a.j] = a.s;
    theta[lay_.end + a.j] = a.e;
    if (alone) {
      for (int jj = 0; jj < atoms; ++jj) theta[lay_.gate_atom + c * atoms + jj] = -kGateSaturation;
    }
    theta[lay_.gate_atom + c * atoms + a.j] = kGateSaturation;
    theta[lay_.gate_conj + c] = kGateSaturation;
  }

  /// Points a random (or the given) atom's predicate along one unit
  /// direction and places its threshold between the `q` quantile of `pos`
  /// and the negatives below it. Positives of `pos` left unsatisfied go to
  /// `dropped`. Returns the atom index.
  int set_atom(std::vector<double>& theta, int c, bool alone, const std::vector<std::size_t>& pos,
               double q, std::vector<std::size_t>* dropped, int j = -1) {
    if (j < 0) j = rng_.uniform_int(0, shape_.n_atoms() - 1);
    const auto a = make_atom(theta, j, pos, q);
    if (dropped) {
      for (std::size_t i : pos) {
        if (window_stat(a, i) <= a.b) dropped->push_back(i);
      }
    }
    apply_atom(theta, a, c, alone);
    return j;
  }

  /// Rebuilds up to two conjunctions from scratch: each starts from the
  /// single atom or pair of atoms (on distinct predicates) from a random
  /// candidate pool that keeps the most still-uncovered positives net of the
  /// negatives it keeps, then grows greedily.
  void propose_cover(std::vector<double>& theta, std::vector<int>& touched) {
    const std::size_t n = data_.size();
    std::vector<AtomChoice> cands;
    std::vector<std::vector<char>> sat;
    for (int m = 0; m < kCoverCandidates; ++m) {
      const int j = rng_.uniform_int(0, shape_.n_atoms() - 1);
      cands.push_back(make_atom(theta, j, positives_, rng_.uniform(0.0, 0.9)));
      std::vector<char> row(n);
      for (std::size_t i = 0; i < n; ++i) row[i] = window_stat(cands.back(), i) > cands.back().b;
      sat.push_back(std::move(row));
    }
    std::vector<char> target(n, 0);
    for (std::size_t i : positives_) target[i] = 1;
    std::vector<int> used_pred;
    const int c0 = rng_.uniform_int(0, shape_.n_conj - 1);
    const int rounds = std::min(2, shape_.n_conj);
    for (int r = 0; r < rounds; ++r) {
      const int c = (c0 + r) % shape_.n_conj;
      auto free_pred = [&](int m) {
        return std::find(used_pred.begin(), used_pred.end(), cands[m].j / 2) == used_pred.end();
      };
      auto score = [&](const std::vector<int>& ms) {
        int s = 0;
        for (std::size_t i = 0; i < n; ++i) {
          bool in = true;
          for (int m : ms) in = in && sat[m][i];
          if (in) s += data_.label[i] > 0 ? target[i] : -open_neg_[i];
        }
        return s;
      };
      int best = 0;
      std::vector<int> chosen;
      for (int m1 = 0; m1 < kCoverCandidates; ++m1) {
        if (!free_pred(m1)) continue;
        const int s1 = score({m1});
        if (s1 > best) {
          best = s1;
          chosen = {m1};
        }
        for (int m2 = m1 + 1; m2 < kCoverCandidates; ++m2) {
          if (!free_pred(m2) || cands[m2].j / 2 == cands[m1].j / 2) continue;
          const int s2 = score({m1, m2});
          if (s2 > best) {
            best = s2;
            chosen = {m1, m2};
          }
        }
      }
      if (chosen.empty()) break;
      // Greedy extension while another atom still helps.
      while (static_cast<int>(chosen.size()) < kCoverMaxAtoms) {
        int add = -1;
        for (int m = 0; m < kCoverCandidates; ++m) {
          if (!free_pred(m)) continue;
          bool clash = false;
          for (int o : chosen) clash = clash || cands[o].j / 2 == cands[m].j / 2;
          if (clash) continue;
          auto ext = chosen;
          ext.push_back(m);
          const int se = score(ext);
          if (se > best) {
            best = se;
            add = m;
          }
        }
        if (add < 0) break;
        chosen.push_back(add);
      }
      std::vector<char> kept(n, 1);
      for (int m : chosen) {
        apply_atom(theta, cands[m], c, m == chosen.front());
        used_pred.push_back(cands[m].j / 2);
        touched.push_back(cands[m].j & ~1);
        touched.push_back(cands[m].j | 1);
        for (std::size_t i = 0; i < n; ++i) kept[i] = kept[i] && sat[m][i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (kept[i]) target[i] = 0;
      }
    }
  }

  const NormalizedData& data_;
  const NetworkShape& shape_;
  const InferenceTrainConfig& cfg_;
  Rng& rng_;
  ParamLayout lay_;
  std::vector<std::size_t> continuous_;
  std::vector<std::size_t> positives_;
  std::vector<std::size_t> negatives_;
  std::vector<int> open_neg_;  ///< 1 for negatives the known rule accepts
  std::vector<double> theta_;
  double eps_ = 0.0;
  std::vector<double> atoms_;
  double loss_ = 0.0;
};

}  // namespace

ad::ParamVector initial_params(const NormalizedData& data, const NetworkShape& shape, Rng& rng) {
  auto p = infer::make_params(shape);
  const auto lay = ParamLayout::of(shape);
  auto th = p.flat();
  const int dim = data.dim;
  const int atoms = shape.n_atoms();
  for (int k = 0; k < shape.n_pred; ++k) {
    const int pd = shape.predicate_dim[k];
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    for (int d = 0; d < dim; ++d) {
      th[lay.a + k * dim + d] = pd >= 0 ? (d == pd ? sign : 0.0) : sign / dim;
    }
    if (data.size() > 0) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(data.size()) - 1));
      const int t = rng.uniform_int(0, shape.horizon);
      th[lay.b + k] = predicate_value(data, shape, th, lay, i, k, t);
    }
  }
  for (int j = 0; j < atoms; ++j) {
    th[lay.start + j] = 0.0;
    th[lay.end + j] = shape.horizon;
  }
  for (int c = 0; c < shape.n_conj; ++c) {
    for (int j = 0; j < atoms; ++j) th[lay.gate_atom + c * atoms + j] = -kGateSaturation;
    th[lay.gate_atom + c * atoms + rng.uniform_int(0, atoms - 1)] = kGateSaturation;
    th[lay.gate_conj + c] = c == 0 ? kGateSaturation : -kGateSaturation;
  }
  return p;
}

InferenceResult train_inference(const stl::SignalSet& data, const NetworkShape& shape,
                                const InferenceTrainConfig& cfg, const InferenceStart& start) {
  cfg.validate();
  shape.validate();
  if (data.empty()) throw EmptyDataset("train_inference: empty dataset");
  bool pos = false;
  bool neg = false;
  for (const auto& ls : data) {
    if (static_cast<int>(ls.signal.dim()) != shape.dim()) {
      throw DimensionMismatch("signal dimension does not match the network");
    }
    if (ls.signal.last_time() < shape.horizon) {
      throw HorizonExceeded("signal shorter than the network horizon");
    }
    pos = pos || ls.label > 0;
    neg = neg || ls.label < 0;
  }
  if (!pos || !neg) throw NoNegativeData("train_inference needs both labels");
  if (start.known_rule && stl::horizon(*start.known_rule) > data.front().signal.last_time()) {
    throw HorizonExceeded("known rule horizon exceeds the signals");
  }

  Rng rng(cfg.seed);
  InferenceResult out;
  out.model.shape = shape;
  out.model.normalizer = start.normalizer ? *start.normalizer : infer::Normalizer::fit(data);
  out.model.known_rule = start.known_rule;
  const auto nd = NormalizedData::make(data, out.model.normalizer, start.known_rule, shape.tau);

  ad::ParamVector params = start.params ? *start.params : initial_params(nd, shape, rng);
  if (params.size() != ParamLayout::of(shape).total) {
    throw DimensionMismatch("warm-start parameters do not match the shape");
  }
  const auto flat = params.flat();
  Annealer ann(nd, shape, cfg, rng);
  ann.reset(std::vector<double>(flat.begin(), flat.end()), start.margin.value_or(cfg.margin));

  std::vector<double> best = ann.theta();
  double best_eps = ann.eps();
  double best_loss = ann.loss();
  out.incumbent_losses.push_back(best_loss);
  auto track = [&] {
    if (ann.loss() < best_loss) {
      best_loss = ann.loss();
      best = ann.theta();
      best_eps = ann.eps();
      out.incumbent_losses.push_back(best_loss);
    }
  };

  const double T0 = cfg.initial_temperature;
  double T = start.temperature.value_or(T0);
  for (int p = 1; p <= cfg.max_proposals; ++p) {
    if (ann.propose(T, T0)) {
      ++out.accepted;
      track();
    }
    if (p % cfg.epoch == 0) {
      T *= cfg.cooling;
      ann.reset(best, best_eps);
      ann.refine();
      track();
    }
  }
  if (cfg.max_proposals % cfg.epoch != 0 || cfg.max_proposals == 0) {
    ann.reset(best, best_eps);
    ann.refine();
    track();
  }

  params.unflatten(best);
  out.model.params = std::move(params);
  out.margin = best_eps;
  out.loss = best_loss;
  out.temperature = T;
  log_debug("inference: loss " + std::to_string(best_loss) + ", accepted " +
            std::to_string(out.accepted) + "/" + std::to_string(cfg.max_proposals));
  return out;
}

}  // namespace stlgail::train
