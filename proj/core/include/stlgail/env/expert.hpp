// Scripted demonstrators standing in for the unknown expert and the unknown
// distribution of environment trajectories.
#pragma once

#include <vector>

#include "stlgail/env/environment.hpp"
#include "stlgail/io/trajectory.hpp"
#include "stlgail/rng.hpp"
#include "stlgail/stl/formula.hpp"

namespace stlgail::env {

/// Task the unicycle expert is checked against, over (dA, dB, dC, dO):
/// eventually inside RegA or RegB, eventually inside RegC, always clear of
/// Obs.
stl::Formula unicycle_task(const UnicycleEnv& env);

/// One expert pose trajectory (row-major px, py, theta) from `x0`: to
/// whichever of RegA/RegB the initial heading points closer to, then to
/// RegC, then stop.
std::vector<double> unicycle_expert_path(const UnicycleEnv& env, std::span<const double> x0,
                                         Rng& rng);

/// `n` positive trajectories. Each is checked against `unicycle_task` and
/// regenerated with fresh noise up to `max_retries` times.
/// Throws ExpertFailure.
io::Dataset gen_unicycle_expert(const UnicycleEnv& env, int n, Rng& rng);

/// `n` scripted negatives that head straight for RegC without visiting
/// RegA/RegB.
io::Dataset gen_unicycle_negatives(const UnicycleEnv& env, int n, Rng& rng);

enum class Situation { PedestrianPositive, ClearPositive, ClearNegative, PedestrianNegative };

const char* situation_tag(Situation s);
bool has_pedestrian(Situation s);
int situation_label(Situation s);

/// Other-vehicle trajectory, row-major (pot, vot) for t = 0..T.
std::vector<double> gen_other_vehicle(const DrivingEnv& env, bool pedestrian, Rng& rng);

/// One driving demonstration of the given situation.
io::LabeledTrajectory gen_driving_trajectory(const DrivingEnv& env, Situation s, Rng& rng,
                                             std::string id);

/// 4 * n_per_situation trajectories, situations interleaved.
io::Dataset gen_driving_data(const DrivingEnv& env, int n_per_situation, Rng& rng);

}  // namespace stlgail::env
