// Case-study environments: agent dynamics, control box, initial-state
// sampler, the feature map the classifier sees and the normalized state the
// policy sees.
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "stlgail/ad/scalar.hpp"
#include "stlgail/ad/tape.hpp"
#include "stlgail/error.hpp"
#include "stlgail/io/trajectory.hpp"
#include "stlgail/policy/rnn_policy.hpp"
#include "stlgail/rng.hpp"
#include "stlgail/stl/signal.hpp"

namespace stlgail::env {

struct Region {
  std::string name;
  double x = 0.0;
  double y = 0.0;
  double radius = 1.0;

  friend bool operator==(const Region&, const Region&) = default;
};

/// (px, py, theta), (v, omega) -> next pose.
template <class T>
std::array<T, 3> unicycle_step(std::span<const T> x, std::span<const T> u) {
  return {x[0] + u[0] * ad::cos(x[2]), x[1] + u[0] * ad::sin(x[2]), x[2] + u[1]};
}

/// (p, v), a -> (p + v, v + a).
template <class T>
std::array<T, 2> ego_step(std::span<const T> x, const T& a) {
  return {x[0] + x[1], x[1] + a};
}

struct UnicycleExpert {
  double speed = 0.95;
  double speed_noise = 0.05;
  double heading_noise = 0.05;
  double target_fraction = 0.6;  ///< enter RegA/RegB to this fraction of its radius
  double goal_fraction = 0.5;    ///< stop this deep inside RegC
  double avoid_radius = 1.5;
  double avoid_gain = 1.0;
  int max_retries = 10;

  friend bool operator==(const UnicycleExpert&, const UnicycleExpert&) = default;
};

struct UnicycleConfig {
  Region reg_a{"RegA", 1.0, 9.0, 1.0};
  Region reg_b{"RegB", 6.5, 3.5, 0.86};
  Region reg_c{"RegC", 9.0, 9.0, 0.7};
  Region obs{"Obs", 5.0, 8.0, 1.0};
  policy::ControlBox box{{0.0, -std::numbers::pi / 4}, {1.0, std::numbers::pi / 4}};
  int horizon = 20;
  double init_lo = 0.5;
  double init_hi = 2.0;
  double heading_lo = 0.0;
  double heading_hi = std::numbers::pi / 2;
  double workspace_center = 5.0;
  double workspace_half = 5.0;
  UnicycleExpert expert;

  friend bool operator==(const UnicycleConfig&, const UnicycleConfig&) = default;
};

class UnicycleEnv {
 public:
  explicit UnicycleEnv(UnicycleConfig config = {});

  const UnicycleConfig& config() const noexcept { return config_; }
  int horizon() const noexcept { return config_.horizon; }
  const policy::ControlBox& box() const noexcept { return config_.box; }
  static constexpr int agent_dim = 3;
  static constexpr int env_dim = 0;
  static constexpr int feature_dim = 4;
  static constexpr int input_dim = 4;
  std::vector<std::string> agent_names() const { return {"px", "py", "theta"}; }
  std::vector<std::string> env_names() const { return {}; }
  std::vector<std::string> feature_names() const { return {"dA", "dB", "dC", "dO"}; }
  std::array<Region, 4> regions() const {
    return {config_.reg_a, config_.reg_b, config_.reg_c, config_.obs};
  }

  template <class T>
  void step(std::span<const T> x, std::span<const T> u, std::span<T> out) const {
    const auto n = unicycle_step<T>(x, u);
    out[0] = n[0];
    out[1] = n[1];
    out[2] = n[2];
  }

  /// Distances to the centers of RegA, RegB, RegC and Obs.
  template <class T>
  void features(std::span<const T> state, std::span<T> out) const {
    const auto rs = regions();
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const T dx = state[0] - T(rs[i].x);
      const T dy = state[1] - T(rs[i].y);
      out[i] = ad::sqrt(dx * dx + dy * dy);
    }
  }

  template <class T>
  void policy_input(std::span<const T> state, std::span<T> out) const {
    const double c = config_.workspace_center;
    const double s = config_.workspace_half;
    out[0] = (state[0] - T(c)) / T(s);
    out[1] = (state[1] - T(c)) / T(s);
    out[2] = ad::cos(state[2]);
    out[3] = ad::sin(state[2]);
  }

  /// Uniform over [init_lo, init_hi]^2 x [heading_lo, heading_hi].
  std::vector<double> sample_initial(Rng& rng) const;

 private:
  UnicycleConfig config_;
};

struct DrivingScript {
  double cruise_lo = 4.0;
  double cruise_hi = 5.0;
  double accel = 1.0;
  double other_decel = 0.6;
  int onset_lo = 34;
  int onset_hi = 38;
  int reaction = 2;
  double ego_decel = 1.0;
  int negative_stop_lo = 30;
  int negative_stop_hi = 45;
  double accel_noise = 0.05;

  friend bool operator==(const DrivingScript&, const DrivingScript&) = default;
};

struct DrivingConfig {
  policy::ControlBox box{{-3.0}, {3.0}};
  int horizon = 57;
  double ego_init_lo = 0.0;
  double ego_init_hi = 5.0;
  double other_init_lo = 5.0;
  double other_init_hi = 10.0;
  double position_center = 100.0;
  double position_scale = 100.0;
  double velocity_scale = 5.0;
  DrivingScript script;

  friend bool operator==(const DrivingConfig&, const DrivingConfig&) = default;
};

class DrivingEnv {
 public:
  explicit DrivingEnv(DrivingConfig config = {});

  const DrivingConfig& config() const noexcept { return config_; }
  int horizon() const noexcept { return config_.horizon; }
  const policy::ControlBox& box() const noexcept { return config_.box; }
  static constexpr int agent_dim = 2;
  static constexpr int env_dim = 2;
  static constexpr int feature_dim = 4;
  static constexpr int input_dim = 4;
  std::vector<std::string> agent_names() const { return {"peg", "veg"}; }
  std::vector<std::string> env_names() const { return {"pot", "vot"}; }
  std::vector<std::string> feature_names() const { return {"peg", "veg", "pot", "vot"}; }

  template <class T>
  void step(std::span<const T> x, std::span<const T> u, std::span<T> out) const {
    const auto n = ego_step<T>(x, u[0]);
    out[0] = n[0];
    out[1] = n[1];
  }

  template <class T>
  void features(std::span<const T> state, std::span<T> out) const {
    for (std::size_t i = 0; i < 4; ++i) out[i] = state[i];
  }

  template <class T>
  void policy_input(std::span<const T> state, std::span<T> out) const {
    const double c = config_.position_center;
    const double ps = config_.position_scale;
    const double vs = config_.velocity_scale;
    out[0] = (state[0] - T(c)) / T(ps);
    out[1] = state[1] / T(vs);
    out[2] = (state[2] - T(c)) / T(ps);
    out[3] = state[3] / T(vs);
  }

  /// p_eg uniform in [ego_init_lo, ego_init_hi], v_eg = 0.
  std::vector<double> sample_initial(Rng& rng) const;

 private:
  DrivingConfig config_;
};

using Environment = std::variant<UnicycleEnv, DrivingEnv>;

std::string env_name(const Environment& env);
int horizon(const Environment& env);
int agent_dim(const Environment& env);
int env_dim(const Environment& env);
int feature_dim(const Environment& env);
std::vector<std::string> feature_names(const Environment& env);
std::vector<std::string> agent_names(const Environment& env);
std::vector<std::string> env_names(const Environment& env);
const policy::ControlBox& control_box(const Environment& env);
std::vector<double> sample_initial(const Environment& env, Rng& rng);
/// Policy shape matching the environment's input and control dimensions.
policy::PolicyShape policy_shape(const Environment& env, int hidden);

/// Feature signal of a stored trajectory (distances for the unicycle, the
/// raw state for driving).
stl::Signal feature_signal(const Environment& env, const io::LabeledTrajectory& traj);
stl::SignalSet feature_signals(const Environment& env, const io::Dataset& data);

/// Environment trajectories of a dataset, one row-major block per item.
std::vector<std::vector<double>> env_pool(const io::Dataset& data);

/// Feature trace of a row-major state trajectory.
template <class T>
std::vector<T> feature_trace(const Environment& env, std::span<const T> states) {
  return std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        const std::size_t sd = E::agent_dim + E::env_dim;
        const std::size_t rows = states.size() / sd;
        std::vector<T> out(rows * E::feature_dim);
        for (std::size_t t = 0; t < rows; ++t) {
          e.template features<T>(states.subspan(t * sd, sd),
                                 std::span<T>(out.data() + t * E::feature_dim,
                                              E::feature_dim));
        }
        return out;
      },
      env);
}

/// Closed-loop trajectory under the policy: row-major (T+1) x (agent + env)
/// states, hidden state zero at t = 0. `env_traj` holds (T+1) x env_dim
/// values (empty for static environments).
/// Throws DimensionMismatch or NonFiniteState.
template <class T>
std::vector<T> rollout(const Environment& env, const policy::PolicyShape& shape,
                       std::span<const T> theta, std::span<const double> x0,
                       std::span<const double> env_traj) {
  return std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        constexpr std::size_t na = E::agent_dim;
        constexpr std::size_t ne = E::env_dim;
        constexpr std::size_t sd = na + ne;
        const std::size_t steps = static_cast<std::size_t>(e.horizon()) + 1;
        if (x0.size() != na) throw DimensionMismatch("initial state has wrong dimension");
        if (env_traj.size() != steps * ne) {
          throw DimensionMismatch("environment trajectory has wrong shape");
        }
        if (shape.input_dim != E::input_dim ||
            shape.control_dim != static_cast<int>(e.box().dim())) {
          throw DimensionMismatch("policy shape does not match the environment");
        }
        const auto H = static_cast<std::size_t>(shape.hidden);
        std::vector<T> states(steps * sd);
        for (std::size_t i = 0; i < na; ++i) states[i] = T(x0[i]);
        for (std::size_t i = 0; i < ne; ++i) states[na + i] = T(env_traj[i]);
        std::vector<T> h(H, T(0.0));
        std::vector<T> h_next(H);
        std::vector<T> input(E::input_dim);
        std::vector<T> u(e.box().dim());
        std::vector<T> next(na);
        for (std::size_t t = 0; t + 1 < steps; ++t) {
          const std::span<const T> row(states.data() + t * sd, sd);
          e.template policy_input<T>(row, std::span<T>(input));
          policy::policy_step<T>(shape, theta, std::span<const T>(input),
                                 std::span<const T>(h), e.box(), std::span<T>(u),
                                 std::span<T>(h_next));
          h.swap(h_next);
          e.template step<T>(row.subspan(0, na), std::span<const T>(u), std::span<T>(next));
          T* dst = states.data() + (t + 1) * sd;
          for (std::size_t i = 0; i < na; ++i) {
            if (!std::isfinite(ad::value_of(next[i]))) {
              throw NonFiniteState("rollout produced a non-finite state at t = " +
                                   std::to_string(t + 1));
            }
            dst[i] = next[i];
          }
          for (std::size_t i = 0; i < ne; ++i) dst[na + i] = T(env_traj[(t + 1) * ne + i]);
        }
        return states;
      },
      env);
}

/// Packs a double rollout into a trajectory record.
io::LabeledTrajectory to_trajectory(const Environment& env, std::span<const double> states,
                                    std::string id, int label);

}  // namespace stlgail::env
