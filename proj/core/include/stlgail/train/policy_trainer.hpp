// Policy training: stochastic gradient ascent on the mean smooth robustness
// of closed-loop rollouts, with the inference network held fixed.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stlgail/ad/param_vector.hpp"
#include "stlgail/env/environment.hpp"
#include "stlgail/infer/network.hpp"
#include "stlgail/policy/rnn_policy.hpp"
#include "stlgail/rng.hpp"

namespace stlgail::train {

struct PolicyTrainConfig {
  int batch = 32;  ///< M
  int steps = 2000;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;

  friend bool operator==(const PolicyTrainConfig&, const PolicyTrainConfig&) = default;
};

/// Initial agent state and the environment trajectory it runs against.
struct RolloutSample {
  std::vector<double> x0;
  std::vector<double> env_traj;
};

/// M fresh samples: x0 from P0 and environment trajectories drawn uniformly
/// with replacement from `pool` (ignored for static environments).
std::vector<RolloutSample> draw_samples(const env::Environment& env,
                                        const std::vector<std::vector<double>>& pool, int m,
                                        Rng& rng);

/// Smooth robustness of one rollout under the (frozen) model.
template <class T>
T rollout_robustness(const env::Environment& env, const policy::PolicyShape& shape,
                     std::span<const T> theta, const infer::InferenceModel& model,
                     const infer::Evaluator<double>& net,
                     const std::optional<stl::Formula>& rule_n, const RolloutSample& s) {
  const auto states = env::rollout<T>(env, shape, theta, std::span<const double>(s.x0),
                                      std::span<const double>(s.env_traj));
  auto x = env::feature_trace<T>(env, std::span<const T>(states));
  const std::size_t dim = model.normalizer.dim();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t d = i % dim;
    x[i] = (x[i] - T(model.normalizer.mid[d])) / T(model.normalizer.half[d]);
  }
  return infer::evaluate_normalized<T>(model, net, rule_n, std::span<const T>(x));
}

/// (1/M) sum_j r~(rollout(theta, x0_j, env_j)). Throws EmptyInput on no
/// samples, otherwise as `env::rollout`.
template <class T>
T policy_objective(const env::Environment& env, const policy::PolicyShape& shape,
                   std::span<const T> theta, const infer::InferenceModel& model,
                   std::span<const RolloutSample> samples) {
  if (samples.empty()) throw EmptyInput("policy_objective: no samples");
  if (env::horizon(env) < model.shape.horizon) {
    throw HorizonExceeded("rollouts are shorter than the inference horizon");
  }
  const infer::Evaluator<double> net(model.shape, model.params.flat(), model.shape.tau);
  std::optional<stl::Formula> rule_n;
  if (model.known_rule) rule_n = infer::normalize_formula(*model.known_rule, model.normalizer);
  std::vector<T> r;
  r.reserve(samples.size());
  for (const auto& s : samples) {
    r.push_back(rollout_robustness<T>(env, shape, theta, model, net, rule_n, s));
  }
  return ad::sum(std::span<const T>(r)) / T(static_cast<double>(samples.size()));
}

struct ObjectiveGradient {
  double value = 0.0;
  std::vector<double> grad;
};

ObjectiveGradient policy_objective_gradient(const env::Environment& env,
                                            const policy::PolicyShape& shape,
                                            std::span<const double> theta,
                                            const infer::InferenceModel& model,
                                            std::span<const RolloutSample> samples);

struct PolicyTrainResult {
  ad::ParamVector params;
  std::vector<double> objective;  ///< batch objective at each step
};

/// Adam ascent from `theta0`; every step draws a fresh batch. Throws
/// NonFiniteValue when the objective or its gradient diverges.
PolicyTrainResult train_policy(const ad::ParamVector& theta0, const infer::InferenceModel& model,
                               const env::Environment& env, const policy::PolicyShape& shape,
                               const std::vector<std::vector<double>>& pool,
                               const PolicyTrainConfig& cfg);

}  // namespace stlgail::train
