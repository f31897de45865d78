#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace litpipe {

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

// First 8 bytes of the SHA-256, big-endian.
std::uint64_t sha256_prefix64(std::string_view bytes);

}  // namespace litpipe
