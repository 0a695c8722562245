// Adversarial alternation: the inference network separates expert data from
// policy rollouts, the policy is trained against the inference network, and
// its rollouts join the dataset as negatives.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "stlgail/ad/param_vector.hpp"
#include "stlgail/env/environment.hpp"
#include "stlgail/infer/network.hpp"
#include "stlgail/io/trajectory.hpp"
#include "stlgail/stl/formula.hpp"
#include "stlgail/train/inference_trainer.hpp"
#include "stlgail/train/policy_trainer.hpp"

namespace stlgail::train {

struct GanConfig {
  int n_ga = 100;  ///< rollouts appended per iteration
  int max_iterations = 8;
  double stop_threshold = 0.05;
  bool bootstrap = true;  ///< random-policy negatives for positive-only data
  double reheat = 0.1;    ///< warm-start temperature as a fraction of T0
  double eval_tau = 0.01;
  double gate_threshold = 0.5;
  int policy_hidden = 32;
  /// Continue policy training from the previous iteration's parameters;
  /// otherwise start each iteration from a fresh random policy.
  bool policy_warm_start = true;
  /// Policies trained per iteration; the best on a validation batch is kept.
  int policy_restarts = 1;
  /// STL over the feature names conjoined with the learned formula; empty
  /// for none.
  std::string known_rule;

  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const GanConfig&, const GanConfig&) = default;
};

struct GanMetrics {
  int iteration = 0;
  double mcr_smooth = 0.0;
  double mcr_exact = 0.0;
  double mean_policy_robustness = 0.0;  ///< NaN when no policy was trained
  double loss = 0.0;
  double wall_time_s = 0.0;
};

/// Everything needed to continue the loop after `iteration` completed
/// iterations.
struct GanState {
  int iteration = 0;
  io::Dataset dataset;
  /// Size of the dataset `model` was trained on.
  std::size_t trained_size = 0;
  std::size_t original_size = 0;
  bool bootstrapped = false;
  infer::InferenceModel model;
  double margin = 0.0;
  double temperature = 0.0;
  bool has_model = false;
  ad::ParamVector policy;
  std::vector<GanMetrics> history;
  bool stopped = false;
};

struct GanResult {
  infer::InferenceModel model;
  double margin = 0.0;
  ad::ParamVector policy;
  stl::Formula formula = stl::Formula::truth();
  io::Dataset dataset;
  std::vector<GanMetrics> history;
  bool stopped = false;  ///< ended on the MCR threshold
};

struct GanSetup {
  env::Environment env;
  infer::NetworkShape shape;
  InferenceTrainConfig inference;
  PolicyTrainConfig policy;
  GanConfig gan;
  std::uint64_t seed = 0;
};

using GanCallback = std::function<void(const GanState&)>;

/// Initial state: the normalizer is fitted on D0, the policy randomly
/// initialized and, for positive-only data with bootstrapping on, N_ga random
/// policy rollouts are appended as negatives.
/// Throws EmptyDataset, or NoNegativeData when bootstrapping is off.
GanState gan_init(const io::Dataset& d0, const GanSetup& setup);

/// Runs iterations from `state` until the MCR threshold is exceeded or
/// `max_iterations` is reached. `on_iteration` sees the state after every
/// completed iteration. Sub-seeds derive from (seed, iteration, phase) so a
/// resumed run matches an uninterrupted one.
GanResult gan_run(GanState state, const GanSetup& setup, const GanCallback& on_iteration = {});

/// gan_init followed by gan_run.
GanResult gan_loop(const io::Dataset& d0, const GanSetup& setup,
                   const GanCallback& on_iteration = {});

/// Extracted formula, simplified against `data`.
stl::Formula learned_formula(const infer::InferenceModel& model, const stl::SignalSet& data,
                             double gate_threshold);

/// `n` rollouts of `theta` from fresh P0 samples against environment
/// trajectories drawn from `pool`, labeled -1.
io::Dataset policy_rollouts(const env::Environment& env, const policy::PolicyShape& shape,
                            const ad::ParamVector& theta,
                            const std::vector<std::vector<double>>& pool, int n, Rng& rng,
                            const std::string& id_prefix);

}  // namespace stlgail::train
