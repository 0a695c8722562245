#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "stlgail/env/environment.hpp"
#include "stlgail/env/expert.hpp"
#include "stlgail/error.hpp"
#include "stlgail/policy/rnn_policy.hpp"
#include "stlgail/stl/robustness.hpp"

using namespace stlgail;

namespace {

double min_over(const io::LabeledTrajectory& t, std::size_t d, int from, int to, bool env_side) {
  double v = 1e18;
  for (int s = from; s <= to; ++s) {
    const auto row = env_side ? t.env_at(static_cast<std::size_t>(s))
                              : t.agent_at(static_cast<std::size_t>(s));
    v = std::min(v, row[d]);
  }
  return v;
}

}  // namespace

TEST(Dynamics, Unicycle) {
  const std::vector<double> x{1.0, 2.0, std::numbers::pi / 2};
  const std::vector<double> u{0.5, 0.1};
  const auto n = env::unicycle_step<double>(x, u);
  EXPECT_NEAR(n[0], 1.0, 1e-12);
  EXPECT_NEAR(n[1], 2.5, 1e-12);
  EXPECT_NEAR(n[2], std::numbers::pi / 2 + 0.1, 1e-12);
}

TEST(Dynamics, Ego) {
  const std::vector<double> x{3.0, 2.0};
  const auto n = env::ego_step<double>(x, -0.5);
  EXPECT_DOUBLE_EQ(n[0], 5.0);
  EXPECT_DOUBLE_EQ(n[1], 1.5);
}

TEST(Unicycle, FeaturesAreRegionDistances) {
  const env::UnicycleEnv e;
  const std::vector<double> state{9.0, 9.0, 0.0};
  std::vector<double> f(4);
  e.features<double>(state, f);
  EXPECT_DOUBLE_EQ(f[2], 0.0);
  EXPECT_NEAR(f[0], 8.0, 1e-12);
  EXPECT_NEAR(f[3], std::hypot(4.0, 1.0), 1e-12);
}

TEST(Unicycle, InitialStatesInBox) {
  const env::UnicycleEnv e;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto x = e.sample_initial(rng);
    ASSERT_EQ(x.size(), 3u);
    EXPECT_GE(x[0], 0.5);
    EXPECT_LE(x[1], 2.0);
    EXPECT_GE(x[2], 0.0);
    EXPECT_LE(x[2], std::numbers::pi / 2);
  }
}

TEST(Unicycle, ConfigValidation) {
  env::UnicycleConfig c;
  c.reg_a.radius = 0.0;
  EXPECT_THROW(env::UnicycleEnv{c}, InvalidArgument);
}

TEST(Unicycle, ExpertsSatisfyTheTask) {
  const env::UnicycleEnv e;
  const env::Environment environment = e;
  Rng rng(4);
  const auto d = env::gen_unicycle_expert(e, 40, rng);
  ASSERT_EQ(d.size(), 40u);
  const auto task = env::unicycle_task(e);
  int via_a = 0;
  for (const auto& t : d) {
    EXPECT_EQ(t.label, 1);
    EXPECT_EQ(t.horizon(), 20);
    const auto s = env::feature_signal(environment, t);
    EXPECT_TRUE(stl::satisfies(s, task));
    double da = 1e9;
    for (std::size_t k = 0; k < s.length(); ++k) da = std::min(da, s(k, 0));
    via_a += da <= 1.0 ? 1 : 0;
  }
  // Both first regions appear in the demonstrations.
  EXPECT_GT(via_a, 0);
  EXPECT_LT(via_a, 40);
}

TEST(Unicycle, NegativesMissTheFirstRegions) {
  const env::UnicycleEnv e;
  const env::Environment environment = e;
  Rng rng(5);
  const auto d = env::gen_unicycle_negatives(e, 20, rng);
  const auto task = env::unicycle_task(e);
  for (const auto& t : d) {
    EXPECT_EQ(t.label, -1);
    EXPECT_FALSE(stl::satisfies(env::feature_signal(environment, t), task));
  }
}

TEST(Unicycle, ExpertIsDeterministicPerSeed) {
  const env::UnicycleEnv e;
  Rng a(9), b(9);
  EXPECT_EQ(env::gen_unicycle_expert(e, 5, a), env::gen_unicycle_expert(e, 5, b));
}

TEST(Driving, OtherVehicleStopsOnlyForPedestrians) {
  const env::DrivingEnv e;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto ped = env::gen_other_vehicle(e, true, rng);
    const auto clear = env::gen_other_vehicle(e, false, rng);
    ASSERT_EQ(ped.size(), 2u * 58);
    double vmin_ped = 1e9;
    double vmin_clear = 1e9;
    for (int t = 20; t <= 57; ++t) {
      vmin_ped = std::min(vmin_ped, ped[2 * t + 1]);
      vmin_clear = std::min(vmin_clear, clear[2 * t + 1]);
    }
    EXPECT_LT(vmin_ped, 0.1);
    EXPECT_GT(vmin_clear, 2.5);
    EXPECT_DOUBLE_EQ(ped[1], 0.0);
  }
}

TEST(Driving, SituationsAndLabels) {
  const env::DrivingEnv e;
  Rng rng(6);
  const auto d = env::gen_driving_data(e, 5, rng);
  ASSERT_EQ(d.size(), 20u);
  std::set<std::string> tags;
  for (const auto& t : d) {
    tags.insert(t.meta.at("situation"));
    EXPECT_EQ(t.agent_dims, (std::vector<std::string>{"peg", "veg"}));
    EXPECT_EQ(t.env_dims, (std::vector<std::string>{"pot", "vot"}));
    EXPECT_EQ(t.horizon(), 57);
    const bool ped = t.meta.at("pedestrian") == "true";
    const bool ego_stops = min_over(t, 1, 20, 57, false) < 0.1;
    // Positives stop exactly when there is a pedestrian.
    EXPECT_EQ(t.label == 1, ego_stops == ped) << t.id;
    EXPECT_LT(t.env_at(0)[0] - t.agent_at(0)[0], 10.0 + 1e-9);
    EXPECT_GT(t.env_at(0)[0], t.agent_at(0)[0]);
  }
  EXPECT_EQ(tags.size(), 4u);
}

TEST(Driving, SituationHelpers) {
  using env::Situation;
  EXPECT_TRUE(env::has_pedestrian(Situation::PedestrianNegative));
  EXPECT_FALSE(env::has_pedestrian(Situation::ClearPositive));
  EXPECT_EQ(env::situation_label(Situation::ClearNegative), -1);
  EXPECT_EQ(env::situation_label(Situation::PedestrianPositive), 1);
}

TEST(Rollout, ShapesAndEnvironmentReplay) {
  const env::Environment environment = env::DrivingEnv{};
  const auto shape = env::policy_shape(environment, 5);
  EXPECT_EQ(shape.input_dim, 4);
  EXPECT_EQ(shape.control_dim, 1);
  const auto theta = policy::init_policy(shape, 2);
  Rng rng(1);
  const auto other = env::gen_other_vehicle(std::get<env::DrivingEnv>(environment), true, rng);
  const std::vector<double> x0{1.0, 0.0};
  const auto states = env::rollout<double>(environment, shape, theta.flat(), x0, other);
  ASSERT_EQ(states.size(), 58u * 4);
  for (int t = 0; t <= 57; ++t) {
    EXPECT_EQ(states[4 * t + 2], other[2 * t]);
    EXPECT_EQ(states[4 * t + 3], other[2 * t + 1]);
  }
  for (int t = 0; t < 57; ++t) {
    EXPECT_NEAR(states[4 * (t + 1)], states[4 * t] + states[4 * t + 1], 1e-12);
    EXPECT_LE(std::abs(states[4 * (t + 1) + 1] - states[4 * t + 1]), 3.0);
  }
  const auto traj = env::to_trajectory(environment, states, "r", -1);
  EXPECT_EQ(traj.horizon(), 57);
  EXPECT_EQ(env::env_pool({traj}).front(), other);
}

TEST(Rollout, DimensionChecks) {
  const env::Environment environment = env::UnicycleEnv{};
  const auto shape = env::policy_shape(environment, 4);
  const auto theta = policy::make_policy_params(shape);
  EXPECT_THROW(env::rollout<double>(environment, shape, theta.flat(), std::vector<double>{1.0},
                                    {}),
               DimensionMismatch);
  const auto wrong = policy::make_policy_params({4, 4, 1});
  EXPECT_THROW(env::rollout<double>(environment, {4, 4, 1}, wrong.flat(),
                                    std::vector<double>{1.0, 1.0, 0.0}, {}),
               DimensionMismatch);
}

TEST(Rollout, FeatureSignalOfStoredTrajectory) {
  const env::Environment environment = env::UnicycleEnv{};
  Rng rng(2);
  const auto d = env::gen_unicycle_expert(std::get<env::UnicycleEnv>(environment), 1, rng);
  const auto s = env::feature_signal(environment, d[0]);
  EXPECT_EQ(s.names(), (std::vector<std::string>{"dA", "dB", "dC", "dO"}));
  const auto p = d[0].agent_at(3);
  EXPECT_NEAR(s(3, 2), std::hypot(p[0] - 9.0, p[1] - 9.0), 1e-12);
  const env::Environment other = env::DrivingEnv{};
  EXPECT_THROW(env::feature_signal(other, d[0]), DimensionMismatch);
}
