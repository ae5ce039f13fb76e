#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace wildlong {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace wildlong
