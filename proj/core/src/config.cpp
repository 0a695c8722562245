#include "stlgail/config.hpp"

#include <algorithm>

#include "json.hpp"
#include "stlgail/error.hpp"
#include "stlgail/io/dataset_io.hpp"
#include "stlgail/io/digest.hpp"
#include "stlgail/stl/parser.hpp"

namespace stlgail::policy {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ControlBox, lower, upper)
}

namespace stlgail::env {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Region, name, x, y, radius)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(UnicycleExpert, speed, speed_noise, heading_noise,
                                                target_fraction, goal_fraction, avoid_radius,
                                                avoid_gain, max_retries)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(UnicycleConfig, reg_a, reg_b, reg_c, obs, box,
                                                horizon, init_lo, init_hi, heading_lo,
                                                heading_hi, workspace_center, workspace_half,
                                                expert)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DrivingScript, cruise_lo, cruise_hi, accel,
                                                other_decel, onset_lo, onset_hi, reaction,
                                                ego_decel, negative_stop_lo, negative_stop_hi,
                                                accel_noise)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DrivingConfig, box, horizon, ego_init_lo,
                                                ego_init_hi, other_init_lo, other_init_hi,
                                                position_center, position_scale,
                                                velocity_scale, script)
}  // namespace stlgail::env

namespace stlgail::train {
// Trainer seeds are derived from the master seed and not configured.
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(InferenceTrainConfig, margin, learn_margin,
                                                margin_min, margin_max, beta1, beta2,
                                                initial_temperature, cooling, epoch,
                                                max_proposals, acceptance_q, visit_scale,
                                                refine_steps, refine_step_size, coef_bound,
                                                offset_bound)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PolicyTrainConfig, batch, steps, step_size,
                                                beta1, beta2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GanConfig, n_ga, max_iterations,
                                                stop_threshold, bootstrap, reheat, eval_tau,
                                                gate_threshold, policy_hidden, policy_warm_start,
                                                policy_restarts, known_rule)
}  // namespace stlgail::train

namespace stlgail {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NetworkConfig, n_pred, n_conj, tau,
                                                window_sharpness, inert, axis_aligned,
                                                predicate_dims)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OutputConfig, metrics, formula, dataset)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, env, unicycle, driving, network,
                                                inference, policy, gan, seed, output)

namespace {

using nlohmann::json;

void reject_unknown(const json& in, const json& ref, const std::string& path) {
  if (!in.is_object() || !ref.is_object()) return;
  for (const auto& [key, value] : in.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!ref.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    reject_unknown(value, ref[key], where);
  }
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  RunConfig cfg;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j, json(RunConfig{}), "");
    cfg = j.get<RunConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    const auto env = make_environment(cfg);
    const auto shape = make_shape(cfg, env);
    shape.validate();
    if (!cfg.gan.known_rule.empty()) {
      const auto rule = stl::parse(cfg.gan.known_rule, shape.dim_names);
      if (stl::horizon(rule) > shape.horizon) {
        throw ConfigError("known rule horizon exceeds the environment horizon");
      }
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const SyntaxError& e) {
    throw ConfigError(std::string("known rule: ") + e.what());
  } catch (const UnknownVariable& e) {
    throw ConfigError(std::string("known rule: ") + e.what());
  }
  cfg.inference.validate();
  cfg.policy.validate();
  cfg.gan.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_file(path));
}

std::string config_to_json(const RunConfig& cfg) { return json(cfg).dump(2); }

std::string config_digest(const RunConfig& cfg) {
  return io::hex_digest(io::fnv1a(json(cfg).dump()));
}

env::Environment make_environment(const RunConfig& cfg) {
  if (cfg.env == "unicycle") return env::UnicycleEnv(cfg.unicycle);
  if (cfg.env == "driving") return env::DrivingEnv(cfg.driving);
  throw ConfigError("unknown environment '" + cfg.env + "' (expected unicycle or driving)");
}

infer::NetworkShape make_shape(const RunConfig& cfg, const env::Environment& env) {
  const auto& n = cfg.network;
  infer::NetworkShape s;
  s.n_pred = n.n_pred;
  s.n_conj = n.n_conj;
  s.horizon = env::horizon(env);
  s.tau = n.tau;
  s.window_sharpness = n.window_sharpness;
  s.inert = n.inert;
  s.dim_names = env::feature_names(env);
  std::vector<int> dims;
  for (const auto& name : n.predicate_dims) {
    const auto it = std::find(s.dim_names.begin(), s.dim_names.end(), name);
    if (it == s.dim_names.end()) throw ConfigError("unknown predicate dimension '" + name + "'");
    dims.push_back(static_cast<int>(it - s.dim_names.begin()));
  }
  if (dims.empty()) {
    for (int d = 0; d < s.dim(); ++d) dims.push_back(d);
  }
  for (int k = 0; k < n.n_pred; ++k) {
    s.predicate_dim.push_back(n.axis_aligned ? dims[static_cast<std::size_t>(k) % dims.size()]
                                             : -1);
  }
  return s;
}

train::GanSetup make_setup(const RunConfig& cfg) {
  auto env = make_environment(cfg);
  auto shape = make_shape(cfg, env);
  return {std::move(env), std::move(shape), cfg.inference, cfg.policy, cfg.gan, cfg.seed};
}

}  // namespace stlgail
