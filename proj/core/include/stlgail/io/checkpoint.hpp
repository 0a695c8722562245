// Single-document JSON checkpoints. The original dataset is referenced by
// digest and path; trajectories generated during training are embedded.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "stlgail/config.hpp"
#include "stlgail/io/trajectory.hpp"
#include "stlgail/train/gan.hpp"

namespace stlgail::io {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig config;
  std::string config_digest;
  policy::PolicyShape policy_shape;
  /// GAN state with `dataset` holding only the generated trajectories
  /// (bootstrap and policy negatives).
  train::GanState state;
  std::string dataset_digest;  ///< of the original dataset
  std::string dataset_path;
  std::string formula;  ///< learned formula text, informational
};

std::string checkpoint_to_json(const Checkpoint& c);
/// Throws ParseError or VersionMismatch; never returns a partial checkpoint.
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Checkpoint of a live GAN state over the original dataset `d0`.
Checkpoint make_checkpoint(const RunConfig& config, const train::GanState& state,
                           const Dataset& d0, const std::string& dataset_path,
                           const std::string& formula);

/// Full GAN state: `d0` followed by the embedded generated trajectories.
/// Throws DatasetMismatch when `d0` does not match the recorded digest.
train::GanState restore_state(const Checkpoint& c, const Dataset& d0);

}  // namespace stlgail::io
