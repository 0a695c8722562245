#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace stlgail::io {

/// One demonstration or rollout: agent and environment states over t = 0..T,
/// both stored row-major. Static environments have no env dims.
struct LabeledTrajectory {
  std::string id;
  int label = 1;
  std::vector<std::string> agent_dims;
  std::vector<std::string> env_dims;
  std::vector<double> agent_states;
  std::vector<double> env_states;
  std::map<std::string, std::string> meta;

  std::size_t length() const noexcept {
    return agent_dims.empty() ? 0 : agent_states.size() / agent_dims.size();
  }
  int horizon() const noexcept { return static_cast<int>(length()) - 1; }
  std::span<const double> agent_at(std::size_t t) const {
    return {agent_states.data() + t * agent_dims.size(), agent_dims.size()};
  }
  std::span<const double> env_at(std::size_t t) const {
    return {env_states.data() + t * env_dims.size(), env_dims.size()};
  }

  friend bool operator==(const LabeledTrajectory&, const LabeledTrajectory&) = default;
};

using Dataset = std::vector<LabeledTrajectory>;

inline std::size_t count_label(const Dataset& d, int label) {
  std::size_t n = 0;
  for (const auto& t : d) n += t.label == label ? 1 : 0;
  return n;
}

}  // namespace stlgail::io
