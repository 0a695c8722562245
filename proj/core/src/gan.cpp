#include "stlgail/train/gan.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "stlgail/error.hpp"
#include "stlgail/infer/extract.hpp"
#include "stlgail/log.hpp"
#include "stlgail/stl/parser.hpp"
#include "stlgail/train/mcr.hpp"

namespace stlgail::train {
namespace {

enum Phase : std::uint64_t {
  kPolicyInit = 1,
  kBootstrapPolicy = 2,
  kBootstrapRollout = 3,
  kInference = 4,
  kPolicy = 5,
  kRollout = 6,
  kPolicyRestart = 7,
  kPolicyValidation = 8,
};

std::vector<std::vector<double>> original_pool(const GanState& s) {
  const io::Dataset d0(s.dataset.begin(),
                       s.dataset.begin() + static_cast<std::ptrdiff_t>(s.original_size));
  return env::env_pool(d0);
}

stl::SignalSet signals_of(const env::Environment& env, const io::Dataset& d, std::size_t n) {
  const io::Dataset head(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n));
  return env::feature_signals(env, head);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

/// Trains `policy_restarts` policies against the current model (the first
/// from the previous parameters when warm starting) and keeps the one with
/// the highest objective on a shared validation batch.
ad::ParamVector best_policy(const GanState& s, const GanSetup& setup,
                            const policy::PolicyShape& pshape,
                            const std::vector<std::vector<double>>& pool) {
  const auto it = static_cast<std::uint64_t>(s.iteration);
  const int n = setup.gan.policy_restarts;
  std::vector<RolloutSample> val;
  if (n > 1) {
    Rng vrng(derive_seed(setup.seed, {it, kPolicyValidation}));
    val = draw_samples(setup.env, pool, setup.gan.n_ga, vrng);
  }
  ad::ParamVector best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < n; ++r) {
    const bool warm = setup.gan.policy_warm_start && r == 0;
    const auto theta0 =
        warm ? s.policy
             : policy::init_policy(pshape, derive_seed(setup.seed, {it, kPolicyRestart,
                                                                    static_cast<std::uint64_t>(r)}));
    PolicyTrainConfig pcfg = setup.policy;
    pcfg.seed = derive_seed(setup.seed, {it, kPolicy, static_cast<std::uint64_t>(r)});
    auto theta = train_policy(theta0, s.model, setup.env, pshape, pool, pcfg).params;
    if (n == 1) return theta;
    const double v = policy_objective<double>(setup.env, pshape, theta.flat(), s.model,
                                              std::span<const RolloutSample>(val));
    log_info("policy candidate " + std::to_string(r) + ": validation objective " + fmt(v));
    if (v > best_value) {
      best_value = v;
      best = std::move(theta);
    }
  }
  return best;
}

}  // namespace

void GanConfig::validate() const {
  if (n_ga < 1) throw ConfigError("n_ga must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(stop_threshold >= 0.0 && stop_threshold <= 1.0)) {
    throw ConfigError("stop threshold must be in [0, 1]");
  }
  if (!(reheat > 0.0 && reheat <= 1.0)) throw ConfigError("reheat must be in (0, 1]");
  if (!(eval_tau > 0.0)) throw ConfigError("eval_tau must be > 0");
  if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) {
    throw ConfigError("gate threshold must be in (0, 1)");
  }
  if (policy_hidden < 1) throw ConfigError("policy hidden size must be >= 1");
  if (policy_restarts < 1) throw ConfigError("policy restarts must be >= 1");
}

stl::Formula learned_formula(const infer::InferenceModel& model, const stl::SignalSet& data,
                             double gate_threshold) {
  auto f = infer::simplify(infer::extract_formula(model, gate_threshold), data);
  if (!model.known_rule) return f;
  if (f.kind() == stl::Kind::True) return *model.known_rule;
  return stl::Formula::conjunction({std::move(f), *model.known_rule});
}

io::Dataset policy_rollouts(const env::Environment& env, const policy::PolicyShape& shape,
                            const ad::ParamVector& theta,
                            const std::vector<std::vector<double>>& pool, int n, Rng& rng,
                            const std::string& id_prefix) {
  const auto samples = draw_samples(env, pool, n, rng);
  io::Dataset out;
  out.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto states =
        env::rollout<double>(env, shape, theta.flat(), std::span<const double>(samples[k].x0),
                             std::span<const double>(samples[k].env_traj));
    out.push_back(env::to_trajectory(env, states, id_prefix + "-" + std::to_string(k), -1));
  }
  return out;
}

GanState gan_init(const io::Dataset& d0, const GanSetup& setup) {
  setup.gan.validate();
  if (d0.empty()) throw EmptyDataset("gan_loop: empty dataset");
  GanState s;
  s.dataset = d0;
  s.original_size = d0.size();
  const auto sig = env::feature_signals(setup.env, d0);
  s.model.shape = setup.shape;
  s.model.normalizer = infer::Normalizer::fit(sig);
  if (!setup.gan.known_rule.empty()) {
    s.model.known_rule = stl::parse(setup.gan.known_rule, setup.shape.dim_names);
  }
  const auto pshape = env::policy_shape(setup.env, setup.gan.policy_hidden);
  s.policy = policy::init_policy(pshape, derive_seed(setup.seed, {0, kPolicyInit}));
  s.temperature = setup.inference.initial_temperature;

  if (io::count_label(d0, -1) == 0) {
    if (!setup.gan.bootstrap) throw NoNegativeData("dataset has no negatives and bootstrap is off");
    const auto random_policy =
        policy::init_policy(pshape, derive_seed(setup.seed, {0, kBootstrapPolicy}));
    Rng rng(derive_seed(setup.seed, {0, kBootstrapRollout}));
    auto neg = policy_rollouts(setup.env, pshape, random_policy, original_pool(s),
                               setup.gan.n_ga, rng, "bootstrap");
    for (auto& t : neg) {
      t.meta["source"] = "bootstrap";
      s.dataset.push_back(std::move(t));
    }
    s.bootstrapped = true;
    log_info("bootstrap: appended " + std::to_string(setup.gan.n_ga) +
             " random-policy rollouts as negatives");
  }
  s.trained_size = s.dataset.size();
  return s;
}

GanResult gan_run(GanState s, const GanSetup& setup, const GanCallback& on_iteration) {
  setup.gan.validate();
  const auto& env = setup.env;
  const auto pshape = env::policy_shape(env, setup.gan.policy_hidden);
  const auto pool = original_pool(s);
  const double T0 = setup.inference.initial_temperature;

  while (!s.stopped && s.iteration < setup.gan.max_iterations) {
    const auto t_start = std::chrono::steady_clock::now();
    const int it = s.iteration;
    const std::size_t n = s.dataset.size();
    const auto sig = signals_of(env, s.dataset, n);

    InferenceTrainConfig icfg = setup.inference;
    icfg.seed = derive_seed(setup.seed, {static_cast<std::uint64_t>(it), kInference});
    InferenceStart start;
    start.normalizer = s.model.normalizer;
    start.known_rule = s.model.known_rule;
    if (s.has_model) {
      start.params = s.model.params;
      start.margin = s.margin;
      start.temperature = setup.gan.reheat * T0;
    }
    auto inf = train_inference(sig, setup.shape, icfg, start);

    GanMetrics m;
    m.iteration = it;
    m.loss = inf.loss;
    m.mcr_smooth = mcr(inf.model, sig, setup.gan.eval_tau);
    m.mcr_exact = mcr(learned_formula(inf.model, sig, setup.gan.gate_threshold), sig);
    log_info("iteration " + std::to_string(it) + ": " + std::to_string(n) +
             " trajectories, loss " + fmt(m.loss) + ", mcr smooth " + fmt(m.mcr_smooth) +
             ", exact " + fmt(m.mcr_exact));

    if (std::max(m.mcr_exact, m.mcr_smooth) > setup.gan.stop_threshold && s.has_model) {
      // The discriminator can no longer separate expert and policy data;
      // keep the previous iteration's classifier, policy and dataset.
      m.mean_policy_robustness = std::numeric_limits<double>::quiet_NaN();
      m.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      s.history.push_back(m);
      s.dataset.resize(s.trained_size);
      s.stopped = true;
      ++s.iteration;
      log_info("stop: MCR above " + fmt(setup.gan.stop_threshold) +
               ", rolled back to iteration " + std::to_string(it - 1));
      if (on_iteration) on_iteration(s);
      break;
    }
    if (!s.has_model && std::max(m.mcr_exact, m.mcr_smooth) > setup.gan.stop_threshold) {
      log_warn("first inference step did not reach the MCR threshold; continuing");
    }

    s.model = std::move(inf.model);
    s.margin = inf.margin;
    s.temperature = inf.temperature;
    s.has_model = true;
    s.trained_size = n;

    s.policy = best_policy(s, setup, pshape, pool);

    Rng rng(derive_seed(setup.seed, {static_cast<std::uint64_t>(it), kRollout}));
    auto rolls = policy_rollouts(env, pshape, s.policy, pool, setup.gan.n_ga, rng,
                                 "gan" + std::to_string(it));
    double sum = 0.0;
    for (const auto& t : rolls) {
      sum += infer::infer_robustness(env::feature_signal(env, t), s.model);
    }
    m.mean_policy_robustness = sum / static_cast<double>(rolls.size());
    log_info("iteration " + std::to_string(it) + ": mean policy robustness " +
             fmt(m.mean_policy_robustness));

    ++s.iteration;
    if (s.iteration < setup.gan.max_iterations) {
      for (auto& t : rolls) {
        t.meta["source"] = "policy";
        t.meta["iteration"] = std::to_string(it);
        s.dataset.push_back(std::move(t));
      }
    }
    m.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    s.history.push_back(m);
    if (on_iteration) on_iteration(s);
  }

  GanResult r;
  r.model = s.model;
  r.margin = s.margin;
  r.policy = s.policy;
  r.dataset = s.dataset;
  r.history = s.history;
  r.stopped = s.stopped;
  r.dataset.resize(s.trained_size);
  r.formula = learned_formula(r.model, env::feature_signals(env, r.dataset),
                              setup.gan.gate_threshold);
  return r;
}

GanResult gan_loop(const io::Dataset& d0, const GanSetup& setup, const GanCallback& on_iteration) {
  return gan_run(gan_init(d0, setup), setup, on_iteration);
}

}  // namespace stlgail::train
