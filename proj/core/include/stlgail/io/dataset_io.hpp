// Datasets as JSON Lines, one trajectory per line:
//
//   {"id": .., "label": 1|-1, "agent_dims": [..], "env_dims": [..], "dt": 1,
//    "agent_states": [[..], ..], "env_states": [[..], ..], "meta": {..}}
//
// Doubles are written in their shortest round-trip form.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stlgail/io/trajectory.hpp"

namespace stlgail::io {

std::string trajectory_to_json(const LabeledTrajectory& t);
std::string dataset_to_jsonl(const Dataset& d);

/// Throws ParseError (with 1-based line number) on malformed lines or labels
/// other than +1/-1, and InconsistentHorizon when lines disagree on T.
Dataset parse_dataset(std::string_view text);

/// Throws IoError.
void save_dataset(const Dataset& d, const std::filesystem::path& path);
/// Throws IoError, ParseError, InconsistentHorizon.
Dataset load_dataset(const std::filesystem::path& path);

/// Whole file as a string. Throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and rename. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace stlgail::io
