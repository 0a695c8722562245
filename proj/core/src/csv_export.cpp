#include "stlgail/io/csv_export.hpp"

#include <cmath>

#include "stlgail/error.hpp"
#include "stlgail/io/dataset_io.hpp"
#include "stlgail/stl/parser.hpp"

namespace stlgail::io {
namespace {

std::string num(double v) { return std::isnan(v) ? "nan" : stl::format_number(v); }

std::string header_comment(const std::string& comment) {
  return comment.empty() ? "" : "# " + comment + "\n";
}

}  // namespace

std::string rollouts_csv(const Dataset& trajectories, const std::string& comment) {
  if (trajectories.empty()) throw EmptyInput("no trajectories to export");
  const auto& first = trajectories.front();
  std::string out = header_comment(comment) + "traj_id,t";
  for (const auto& d : first.agent_dims) out += "," + d;
  for (const auto& d : first.env_dims) out += "," + d;
  out += ",label,source\n";
  for (const auto& tr : trajectories) {
    if (tr.agent_dims != first.agent_dims || tr.env_dims != first.env_dims) {
      throw DimensionMismatch("trajectory '" + tr.id + "' has different dimensions");
    }
    const auto it = tr.meta.find("source");
    const std::string source = it == tr.meta.end() ? "" : it->second;
    for (std::size_t t = 0; t < tr.length(); ++t) {
      out += tr.id + "," + std::to_string(t);
      for (double v : tr.agent_at(t)) out += "," + num(v);
      if (!tr.env_dims.empty()) {
        for (double v : tr.env_at(t)) out += "," + num(v);
      }
      out += "," + std::to_string(tr.label) + "," + source + "\n";
    }
  }
  return out;
}

void export_rollouts(const Dataset& trajectories, const std::filesystem::path& path,
                     const std::string& comment) {
  write_file(path, rollouts_csv(trajectories, comment));
}

std::string metrics_csv(const std::vector<train::GanMetrics>& history,
                        const std::string& comment) {
  std::string out =
      header_comment(comment) + "iteration,mcr_smooth,mcr_exact,mean_policy_robustness,loss\n";
  for (const auto& m : history) {
    out += std::to_string(m.iteration) + "," + num(m.mcr_smooth) + "," + num(m.mcr_exact) + "," +
           num(m.mean_policy_robustness) + "," + num(m.loss) + "\n";
  }
  return out;
}

std::string timing_csv(const std::vector<train::GanMetrics>& history) {
  std::string out = "iteration,wall_time_s\n";
  for (const auto& m : history) {
    out += std::to_string(m.iteration) + "," + num(m.wall_time_s) + "\n";
  }
  return out;
}

}  // namespace stlgail::io
