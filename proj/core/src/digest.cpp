#include "stlgail/io/digest.hpp"

#include <cstdio>

#include "stlgail/io/dataset_io.hpp"

namespace stlgail::io {

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dataset_digest(const Dataset& d) { return hex_digest(fnv1a(dataset_to_jsonl(d))); }

}  // namespace stlgail::io
