#include "stlgail/train/policy_trainer.hpp"

#include <cmath>

#include "stlgail/ad/adam.hpp"
#include "stlgail/ad/tape.hpp"
#include "stlgail/error.hpp"

namespace stlgail::train {

void PolicyTrainConfig::validate() const {
  if (batch < 1) throw ConfigError("policy batch size must be >= 1");
  if (steps < 0) throw ConfigError("policy steps must be >= 0");
  if (!(step_size > 0.0)) throw ConfigError("policy step size must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam moments must be in [0, 1)");
  }
}

std::vector<RolloutSample> draw_samples(const env::Environment& env,
                                        const std::vector<std::vector<double>>& pool, int m,
                                        Rng& rng) {
  const auto ne = static_cast<std::size_t>(env::env_dim(env));
  const auto rows = static_cast<std::size_t>(env::horizon(env)) + 1;
  if (ne > 0 && pool.empty()) throw EmptyDataset("no environment trajectories to sample");
  std::vector<RolloutSample> out(static_cast<std::size_t>(m));
  for (auto& s : out) {
    s.x0 = env::sample_initial(env, rng);
    if (ne > 0) {
      const auto& src = pool[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
      if (src.size() < rows * ne) {
        throw DimensionMismatch("environment trajectory shorter than the horizon");
      }
      s.env_traj.assign(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(rows * ne));
    }
  }
  return out;
}

ObjectiveGradient policy_objective_gradient(const env::Environment& env,
                                            const policy::PolicyShape& shape,
                                            std::span<const double> theta,
                                            const infer::InferenceModel& model,
                                            std::span<const RolloutSample> samples) {
  ad::Tape tape;
  ad::TapeScope scope(tape);
  const auto th = tape.variables(theta);
  const ad::Var J = policy_objective<ad::Var>(env, shape, th, model, samples);
  return {J.value(), tape.gradient(J, th)};
}

PolicyTrainResult train_policy(const ad::ParamVector& theta0, const infer::InferenceModel& model,
                               const env::Environment& env, const policy::PolicyShape& shape,
                               const std::vector<std::vector<double>>& pool,
                               const PolicyTrainConfig& cfg) {
  cfg.validate();
  PolicyTrainResult out{theta0, {}};
  auto theta = out.params.flat();
  ad::Adam adam(theta.size(), {cfg.step_size, cfg.beta1, cfg.beta2, 1e-8});
  Rng rng(cfg.seed);
  ad::Tape tape;
  std::vector<double> ascent(theta.size());
  for (int step = 0; step < cfg.steps; ++step) {
    const auto samples = draw_samples(env, pool, cfg.batch, rng);
    tape.clear();
    ad::TapeScope scope(tape);
    const auto th = tape.variables(theta);
    const ad::Var J =
        policy_objective<ad::Var>(env, shape, th, model, std::span<const RolloutSample>(samples));
    const auto g = tape.gradient(J, th);
    if (!std::isfinite(J.value())) throw NonFiniteValue("policy objective diverged");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) throw NonFiniteValue("policy gradient diverged");
      ascent[i] = -g[i];
    }
    adam.step(theta, ascent);
    out.objective.push_back(J.value());
  }
  return out;
}

}  // namespace stlgail::train
