#include "stlgail/env/environment.hpp"

namespace stlgail::env {

UnicycleEnv::UnicycleEnv(UnicycleConfig config) : config_(std::move(config)) {
  config_.box.validate();
  if (config_.box.dim() != 2) throw InvalidArgument("unicycle control box must be 2-D");
  if (config_.horizon < 1) throw InvalidArgument("horizon must be >= 1");
  for (const auto& r : regions()) {
    if (!(r.radius > 0.0)) throw InvalidArgument("region '" + r.name + "' needs radius > 0");
  }
  if (!(config_.init_lo <= config_.init_hi) || !(config_.heading_lo <= config_.heading_hi)) {
    throw InvalidArgument("initial-state box is empty");
  }
}

std::vector<double> UnicycleEnv::sample_initial(Rng& rng) const {
  const double px = rng.uniform(config_.init_lo, config_.init_hi);
  const double py = rng.uniform(config_.init_lo, config_.init_hi);
  const double th = rng.uniform(config_.heading_lo, config_.heading_hi);
  return {px, py, th};
}

DrivingEnv::DrivingEnv(DrivingConfig config) : config_(std::move(config)) {
  config_.box.validate();
  if (config_.box.dim() != 1) throw InvalidArgument("driving control box must be 1-D");
  if (config_.horizon < 1) throw InvalidArgument("horizon must be >= 1");
  if (!(config_.ego_init_lo <= config_.ego_init_hi) ||
      !(config_.other_init_lo <= config_.other_init_hi)) {
    throw InvalidArgument("initial-position range is empty");
  }
  if (!(config_.position_scale > 0.0) || !(config_.velocity_scale > 0.0)) {
    throw InvalidArgument("normalization scales must be positive");
  }
}

std::vector<double> DrivingEnv::sample_initial(Rng& rng) const {
  return {rng.uniform(config_.ego_init_lo, config_.ego_init_hi), 0.0};
}

std::string env_name(const Environment& env) {
  return std::holds_alternative<UnicycleEnv>(env) ? "unicycle" : "driving";
}

int horizon(const Environment& env) {
  return std::visit([](const auto& e) { return e.horizon(); }, env);
}

int agent_dim(const Environment& env) {
  return std::visit([](const auto& e) { return std::decay_t<decltype(e)>::agent_dim; }, env);
}

int env_dim(const Environment& env) {
  return std::visit([](const auto& e) { return std::decay_t<decltype(e)>::env_dim; }, env);
}

int feature_dim(const Environment& env) {
  return std::visit([](const auto& e) { return std::decay_t<decltype(e)>::feature_dim; }, env);
}

std::vector<std::string> feature_names(const Environment& env) {
  return std::visit([](const auto& e) { return e.feature_names(); }, env);
}

std::vector<std::string> agent_names(const Environment& env) {
  return std::visit([](const auto& e) { return e.agent_names(); }, env);
}

std::vector<std::string> env_names(const Environment& env) {
  return std::visit([](const auto& e) { return e.env_names(); }, env);
}

const policy::ControlBox& control_box(const Environment& env) {
  return std::visit([](const auto& e) -> const policy::ControlBox& { return e.box(); }, env);
}

std::vector<double> sample_initial(const Environment& env, Rng& rng) {
  return std::visit([&](const auto& e) { return e.sample_initial(rng); }, env);
}

policy::PolicyShape policy_shape(const Environment& env, int hidden) {
  return std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        return policy::PolicyShape{E::input_dim, hidden, static_cast<int>(e.box().dim())};
      },
      env);
}

stl::Signal feature_signal(const Environment& env, const io::LabeledTrajectory& traj) {
  const auto na = static_cast<std::size_t>(agent_dim(env));
  const auto ne = static_cast<std::size_t>(env_dim(env));
  if (traj.agent_dims.size() != na || traj.env_dims.size() != ne) {
    throw DimensionMismatch("trajectory '" + traj.id + "' does not match environment " +
                            env_name(env));
  }
  const std::size_t rows = traj.length();
  if (ne > 0 && traj.env_states.size() != rows * ne) {
    throw DimensionMismatch("trajectory '" + traj.id + "' has inconsistent env states");
  }
  std::vector<double> states(rows * (na + ne));
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t i = 0; i < na; ++i) states[t * (na + ne) + i] = traj.agent_states[t * na + i];
    for (std::size_t i = 0; i < ne; ++i) {
      states[t * (na + ne) + na + i] = traj.env_states[t * ne + i];
    }
  }
  return stl::Signal(feature_names(env),
                     feature_trace<double>(env, std::span<const double>(states)));
}

stl::SignalSet feature_signals(const Environment& env, const io::Dataset& data) {
  stl::SignalSet out;
  out.reserve(data.size());
  for (const auto& t : data) out.push_back({feature_signal(env, t), t.label});
  return out;
}

std::vector<std::vector<double>> env_pool(const io::Dataset& data) {
  std::vector<std::vector<double>> out;
  out.reserve(data.size());
  for (const auto& t : data) out.push_back(t.env_states);
  return out;
}

io::LabeledTrajectory to_trajectory(const Environment& env, std::span<const double> states,
                                    std::string id, int label) {
  const auto na = static_cast<std::size_t>(agent_dim(env));
  const auto ne = static_cast<std::size_t>(env_dim(env));
  io::LabeledTrajectory t;
  t.id = std::move(id);
  t.label = label;
  t.agent_dims = agent_names(env);
  t.env_dims = env_names(env);
  const std::size_t rows = states.size() / (na + ne);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < na; ++i) t.agent_states.push_back(states[r * (na + ne) + i]);
    for (std::size_t i = 0; i < ne; ++i) t.env_states.push_back(states[r * (na + ne) + na + i]);
  }
  t.meta["env"] = env_name(env);
  return t;
}

}  // namespace stlgail::env
