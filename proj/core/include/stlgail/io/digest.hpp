#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "stlgail/io/trajectory.hpp"

namespace stlgail::io {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// 16 lowercase hex digits.
std::string hex_digest(std::uint64_t h);

/// FNV-1a over the canonical JSON-Lines form of the dataset.
std::string dataset_digest(const Dataset& d);

}  // namespace stlgail::io
