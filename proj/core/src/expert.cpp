#include "stlgail/env/expert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "stlgail/stl/robustness.hpp"

namespace stlgail::env {
namespace {

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

double distance(double x, double y, const Region& r) { return std::hypot(x - r.x, y - r.y); }

// Turn needed to face the region from the initial pose.
double heading_offset(std::span<const double> x0, const Region& r) {
  return std::abs(wrap_angle(std::atan2(r.y - x0[1], r.x - x0[0]) - x0[2]));
}

std::string make_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%05d", prefix, i);
  return buf;
}

// Waypoint follower. `skip_first` heads straight for RegC.
std::vector<double> waypoint_path(const UnicycleEnv& env, std::span<const double> x0, Rng& rng,
                                  bool skip_first) {
  const auto& cfg = env.config();
  const auto& ex = cfg.expert;
  const auto& box = cfg.box;
  const Region& first = heading_offset(x0, cfg.reg_a) <= heading_offset(x0, cfg.reg_b)
                            ? cfg.reg_a
                            : cfg.reg_b;
  int phase = skip_first ? 1 : 0;
  std::vector<double> out(x0.begin(), x0.end());
  std::array<double, 3> x{x0[0], x0[1], x0[2]};
  for (int t = 0; t < cfg.horizon; ++t) {
    if (phase == 0 && distance(x[0], x[1], first) < ex.target_fraction * first.radius) phase = 1;
    if (phase == 1 && distance(x[0], x[1], cfg.reg_c) < ex.goal_fraction * cfg.reg_c.radius) {
      phase = 2;
    }
    std::array<double, 2> u{0.0, 0.0};
    if (phase < 2) {
      const Region& goal = phase == 0 ? first : cfg.reg_c;
      double desired = std::atan2(goal.y - x[1], goal.x - x[0]);
      const double d_obs = distance(x[0], x[1], cfg.obs);
      if (d_obs < ex.avoid_radius) {
        const double to_obs = std::atan2(cfg.obs.y - x[1], cfg.obs.x - x[0]);
        const double side = wrap_angle(desired - to_obs) >= 0.0 ? 1.0 : -1.0;
        desired += side * ex.avoid_gain * (ex.avoid_radius - d_obs);
      }
      const double err = wrap_angle(desired - x[2]);
      u[1] = std::clamp(err + rng.normal(0.0, ex.heading_noise), box.lower[1], box.upper[1]);
      double v = ex.speed * (1.0 + rng.normal(0.0, ex.speed_noise)) * std::max(0.0, std::cos(err));
      v = std::min(v, distance(x[0], x[1], goal));
      u[0] = std::clamp(v, box.lower[0], box.upper[0]);
    }
    x = unicycle_step<double>(std::span<const double>(x), std::span<const double>(u));
    out.insert(out.end(), x.begin(), x.end());
  }
  return out;
}

io::LabeledTrajectory unicycle_record(const UnicycleEnv& env, std::vector<double> path,
                                      std::string id, int label) {
  io::LabeledTrajectory t;
  t.id = std::move(id);
  t.label = label;
  t.agent_dims = env.agent_names();
  t.agent_states = std::move(path);
  t.meta["env"] = "unicycle";
  return t;
}

}  // namespace

stl::Formula unicycle_task(const UnicycleEnv& env) {
  using stl::Formula;
  const auto& c = env.config();
  const stl::TimeInterval all{0, c.horizon};
  auto inside = [](std::size_t d, double r) { return Formula::negate(Formula::pred(4, d, r)); };
  return Formula::conjunction(
      {Formula::eventually(all, Formula::disjunction({inside(0, c.reg_a.radius),
                                                      inside(1, c.reg_b.radius)})),
       Formula::eventually(all, inside(2, c.reg_c.radius)),
       Formula::always(all, Formula::pred(4, 3, c.obs.radius))});
}

std::vector<double> unicycle_expert_path(const UnicycleEnv& env, std::span<const double> x0,
                                         Rng& rng) {
  return waypoint_path(env, x0, rng, false);
}

io::Dataset gen_unicycle_expert(const UnicycleEnv& env, int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("expert count must be >= 1");
  const auto task = unicycle_task(env);
  const Environment e = env;
  io::Dataset out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto x0 = env.sample_initial(rng);
    bool ok = false;
    for (int attempt = 0; attempt <= env.config().expert.max_retries && !ok; ++attempt) {
      auto rec = unicycle_record(env, unicycle_expert_path(env, x0, rng), make_id("exp", i), 1);
      if (stl::satisfies(feature_signal(e, rec), task)) {
        out.push_back(std::move(rec));
        ok = true;
      }
    }
    if (!ok) {
      throw ExpertFailure("expert trajectory " + std::to_string(i) +
                          " violates the task after all retries");
    }
  }
  return out;
}

io::Dataset gen_unicycle_negatives(const UnicycleEnv& env, int n, Rng& rng) {
  io::Dataset out;
  for (int i = 0; i < n; ++i) {
    const auto x0 = env.sample_initial(rng);
    auto rec = unicycle_record(env, waypoint_path(env, x0, rng, true), make_id("neg", i), -1);
    rec.meta["source"] = "scripted-negative";
    out.push_back(std::move(rec));
  }
  return out;
}

const char* situation_tag(Situation s) {
  switch (s) {
    case Situation::PedestrianPositive: return "pedestrian-stop";
    case Situation::ClearPositive: return "clear-cruise";
    case Situation::ClearNegative: return "clear-stop";
    case Situation::PedestrianNegative: return "pedestrian-cruise";
  }
  return "?";
}

bool has_pedestrian(Situation s) {
  return s == Situation::PedestrianPositive || s == Situation::PedestrianNegative;
}

int situation_label(Situation s) {
  return s == Situation::PedestrianPositive || s == Situation::ClearPositive ? 1 : -1;
}

std::vector<double> gen_other_vehicle(const DrivingEnv& env, bool pedestrian, Rng& rng) {
  const auto& cfg = env.config();
  const auto& sc = cfg.script;
  const double cruise = rng.uniform(sc.cruise_lo, sc.cruise_hi);
  const int onset = rng.uniform_int(sc.onset_lo, sc.onset_hi);
  double p = rng.uniform(cfg.other_init_lo, cfg.other_init_hi);
  double v = 0.0;
  std::vector<double> out{p, v};
  for (int t = 0; t < cfg.horizon; ++t) {
    double a = 0.0;
    if (pedestrian && t >= onset) {
      a = std::max(-sc.other_decel, -v);
    } else {
      a = std::clamp(cruise - v, -sc.other_decel, sc.accel) + rng.normal(0.0, sc.accel_noise);
    }
    p += v;
    v += a;
    out.push_back(p);
    out.push_back(v);
  }
  return out;
}

io::LabeledTrajectory gen_driving_trajectory(const DrivingEnv& env, Situation s, Rng& rng,
                                             std::string id) {
  const auto& cfg = env.config();
  const auto& sc = cfg.script;
  const bool ped = has_pedestrian(s);
  auto other = gen_other_vehicle(env, ped, rng);

  // Ego reacts to the other vehicle's first braking step.
  int other_brake = -1;
  for (int t = 1; t <= cfg.horizon && ped; ++t) {
    if (other[2 * t + 1] < other[2 * t - 1] - 0.5 * sc.other_decel) {
      other_brake = t;
      break;
    }
  }
  int stop_at = -1;
  if (s == Situation::PedestrianPositive) stop_at = other_brake + sc.reaction;
  if (s == Situation::ClearNegative) {
    stop_at = rng.uniform_int(sc.negative_stop_lo, sc.negative_stop_hi);
  }

  const double cruise = rng.uniform(sc.cruise_lo, sc.cruise_hi);
  const auto& box = cfg.box;
  std::array<double, 2> x{env.sample_initial(rng)[0], 0.0};
  io::LabeledTrajectory t;
  t.id = std::move(id);
  t.label = situation_label(s);
  t.agent_dims = env.agent_names();
  t.env_dims = env.env_names();
  t.agent_states = {x[0], x[1]};
  for (int k = 0; k < cfg.horizon; ++k) {
    double a = 0.0;
    if (stop_at >= 0 && k >= stop_at) {
      a = std::max(-sc.ego_decel, -x[1]);
    } else {
      a = std::clamp(cruise - x[1], -sc.ego_decel, sc.accel) + rng.normal(0.0, sc.accel_noise);
    }
    a = std::clamp(a, box.lower[0], box.upper[0]);
    x = ego_step<double>(std::span<const double>(x), a);
    t.agent_states.push_back(x[0]);
    t.agent_states.push_back(x[1]);
  }
  t.env_states = std::move(other);
  t.meta["env"] = "driving";
  t.meta["situation"] = situation_tag(s);
  t.meta["pedestrian"] = ped ? "true" : "false";
  return t;
}

io::Dataset gen_driving_data(const DrivingEnv& env, int n_per_situation, Rng& rng) {
  if (n_per_situation < 1) throw InvalidArgument("n_per_situation must be >= 1");
  constexpr Situation kAll[] = {Situation::PedestrianPositive, Situation::ClearPositive,
                                Situation::ClearNegative, Situation::PedestrianNegative};
  io::Dataset out;
  out.reserve(static_cast<std::size_t>(4 * n_per_situation));
  int i = 0;
  for (int k = 0; k < n_per_situation; ++k) {
    for (Situation s : kAll) {
      out.push_back(gen_driving_trajectory(env, s, rng, make_id("drv", i++)));
    }
  }
  return out;
}

}  // namespace stlgail::env
