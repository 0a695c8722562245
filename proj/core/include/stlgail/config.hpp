// Run configuration: one JSON document selecting the environment and holding
// every constant, shape and training setting. Missing keys take defaults;
// unknown keys are rejected.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stlgail/env/environment.hpp"
#include "stlgail/infer/network.hpp"
#include "stlgail/train/gan.hpp"
#include "stlgail/train/inference_trainer.hpp"
#include "stlgail/train/policy_trainer.hpp"

namespace stlgail {

struct NetworkConfig {
  int n_pred = 6;
  int n_conj = 2;
  double tau = 0.1;
  double window_sharpness = 0.04;
  double inert = 1e3;
  bool axis_aligned = true;
  /// Features axis-aligned predicates cycle through; empty for all.
  std::vector<std::string> predicate_dims;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct OutputConfig {
  /// Empty paths derive from the checkpoint path.
  std::string metrics;
  std::string formula;
  std::string dataset;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  std::string env = "unicycle";
  env::UnicycleConfig unicycle;
  env::DrivingConfig driving;
  NetworkConfig network;
  train::InferenceTrainConfig inference;
  train::PolicyTrainConfig policy;
  train::GanConfig gan;
  std::uint64_t seed = 0;
  OutputConfig output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or
/// invalid values.
RunConfig parse_config(std::string_view json_text);
/// Throws IoError or ConfigError.
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every field spelled out.
std::string config_to_json(const RunConfig& cfg);
/// FNV-1a of the canonical JSON, 16 hex digits.
std::string config_digest(const RunConfig& cfg);

/// Throws ConfigError on an unknown environment or invalid constants.
env::Environment make_environment(const RunConfig& cfg);
infer::NetworkShape make_shape(const RunConfig& cfg, const env::Environment& env);
train::GanSetup make_setup(const RunConfig& cfg);

}  // namespace stlgail
