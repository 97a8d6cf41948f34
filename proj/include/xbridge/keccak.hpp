#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "xbridge/bytes.hpp"

namespace xbridge {

/// Keccak-256 as used by the EVM (original padding 0x01, not the FIPS-202 SHA3 0x06).
Hash32 keccak256(ByteView data);
Hash32 keccak256(std::string_view text);

/// Hex SHA-256 digest, used for stable category keys.
std::string sha256_hex(std::string_view text);

}  // namespace xbridge
