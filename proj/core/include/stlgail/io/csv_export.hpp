#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stlgail/io/trajectory.hpp"
#include "stlgail/train/gan.hpp"

namespace stlgail::io {

/// Long-format CSV: traj_id, t, one column per agent then env dimension,
/// label, source. A nonempty `comment` becomes a leading '#' line.
/// Throws EmptyInput or DimensionMismatch (mixed dimension names).
std::string rollouts_csv(const Dataset& trajectories, const std::string& comment = "");
/// Throws IoError in addition.
void export_rollouts(const Dataset& trajectories, const std::filesystem::path& path,
                     const std::string& comment = "");

/// iteration, mcr_smooth, mcr_exact, mean_policy_robustness, loss.
std::string metrics_csv(const std::vector<train::GanMetrics>& history,
                        const std::string& comment = "");
/// iteration, wall_time_s.
std::string timing_csv(const std::vector<train::GanMetrics>& history);

}  // namespace stlgail::io
