// Inference-network training: hinge loss with a learnable margin, minimized
// by dual annealing (generalized simulated annealing plus periodic Adam
// refinement of the continuous coordinates).
//
//   loss = (1/N) sum_i ReLU(eps - l_i r~(x_i)) + beta1 sum_gates sig(g) - beta2 eps
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stlgail/ad/param_vector.hpp"
#include "stlgail/infer/network.hpp"
#include "stlgail/rng.hpp"
#include "stlgail/stl/signal.hpp"

namespace stlgail::train {

struct InferenceTrainConfig {
  double margin = 0.1;  ///< initial value (the fixed value when not learned)
  bool learn_margin = true;
  double margin_min = 0.01;
  double margin_max = 1.0;
  double beta1 = 0.05;
  double beta2 = 0.1;

  double initial_temperature = 0.05;
  double cooling = 0.95;
  int epoch = 50;  ///< proposals between cooling/refinement
  int max_proposals = 2000;
  double acceptance_q = -5.0;
  double visit_scale = 0.3;  ///< Cauchy scale for continuous moves at T0

  int refine_steps = 20;
  double refine_step_size = 0.01;

  double coef_bound = 3.0;
  double offset_bound = 3.0;

  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const InferenceTrainConfig&, const InferenceTrainConfig&) = default;
};

/// Signals mapped through a normalizer, with their labels.
struct NormalizedData {
  int dim = 0;
  std::vector<std::vector<double>> x;
  std::vector<int> label;
  /// Smooth robustness of the known rule per sample; empty without one.
  std::vector<double> rule;

  /// `rule` is in raw units and evaluated at temperature `tau`.
  static NormalizedData make(const stl::SignalSet& data, const infer::Normalizer& norm,
                             const std::optional<stl::Formula>& rule = std::nullopt,
                             double tau = 0.1);
  std::size_t size() const noexcept { return x.size(); }
};

/// Loss for parameters `theta` and margin `eps` (either double or ad::Var).
template <class T>
T inference_loss(const NormalizedData& data, const infer::NetworkShape& shape,
                 std::span<const T> theta, const T& eps, const InferenceTrainConfig& cfg) {
  if (data.size() == 0) throw EmptyDataset("inference_loss: empty dataset");
  const infer::Evaluator<T> net(shape, theta, shape.tau);
  std::vector<T> hinge;
  hinge.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    T r = net(std::span<const double>(data.x[i]));
    if (!data.rule.empty()) {
      const T both[2] = {r, T(data.rule[i])};
      r = ad::smooth_min(std::span<const T>(both, 2), shape.tau);
    }
    hinge.push_back(ad::relu(eps - T(static_cast<double>(data.label[i])) * r));
  }
  const auto layout = infer::ParamLayout::of(shape);
  std::vector<T> gates(theta.begin() + layout.gate_atom, theta.end());
  for (auto& g : gates) g = ad::sigmoid(g);
  const T fit = ad::sum(std::span<const T>(hinge)) / T(static_cast<double>(data.size()));
  return fit + T(cfg.beta1) * ad::sum(std::span<const T>(gates)) - T(cfg.beta2) * eps;
}

/// Loss of a model on raw signals.
double inference_loss(const stl::SignalSet& data, const infer::InferenceModel& model,
                      double margin, const InferenceTrainConfig& cfg);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> params;  ///< d loss / d theta
  double margin = 0.0;         ///< d loss / d eps
};

/// Loss and its gradient over every coordinate, by one reverse sweep.
LossGradient inference_loss_gradient(const NormalizedData& data,
                                     const infer::NetworkShape& shape,
                                     std::span<const double> theta, double margin,
                                     const InferenceTrainConfig& cfg);

/// Optional warm start. Missing pieces are initialized from the data.
struct InferenceStart {
  std::optional<infer::Normalizer> normalizer;
  std::optional<ad::ParamVector> params;
  std::optional<double> margin;
  std::optional<double> temperature;
  /// Conjoined with the learned formula, raw units.
  std::optional<stl::Formula> known_rule;
};

struct InferenceResult {
  infer::InferenceModel model;
  double margin = 0.0;
  double loss = 0.0;
  double temperature = 0.0;  ///< at the end of the schedule
  /// Loss of the incumbent after each improvement, starting with the initial
  /// parameters. Non-increasing.
  std::vector<double> incumbent_losses;
  int accepted = 0;
};

/// Minimizes the loss over the bounded parameter space. Window endpoints move
/// on integers in [0, T] and gate logits on {-15, +15}; coefficients, offsets
/// and the margin are continuous. Deterministic per seed.
/// Throws EmptyDataset, NoNegativeData (a single label present) or
/// ConfigError.
InferenceResult train_inference(const stl::SignalSet& data, const infer::NetworkShape& shape,
                                const InferenceTrainConfig& cfg,
                                const InferenceStart& start = {});

/// Initial parameters: random unit-sign predicates at data quantiles, full
/// windows, one atom per conjunction, first conjunction on.
ad::ParamVector initial_params(const NormalizedData& data, const infer::NetworkShape& shape,
                               Rng& rng);

}  // namespace stlgail::train
