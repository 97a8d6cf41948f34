#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace xbridge {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Unsigned 256-bit integer; arithmetic wraps, so range checks happen at parse time.
using UInt256 = boost::multiprecision::uint256_t;
/// Signed-magnitude 256-bit integer used for ABI intN values.
using Int256 = boost::multiprecision::int256_t;
/// Unbounded integer for counting (combination sizes) and overflow-free products.
using BigInt = boost::multiprecision::cpp_int;

using ChainId = std::uint64_t;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_hex(ByteView bytes, bool prefix = true);
Bytes from_hex(std::string_view text);

/// Fixed-width byte string. Equality is byte equality, so addresses compare
/// case-insensitively once parsed.
template <std::size_t N>
class FixedBytes {
 public:
  static constexpr std::size_t size_bytes = N;

  FixedBytes() { bytes_.fill(0); }
  explicit FixedBytes(const std::array<std::uint8_t, N>& raw) : bytes_(raw) {}

  static FixedBytes from_span(ByteView raw) {
    if (raw.size() != N) {
      throw ParseError("expected " + std::to_string(N) + " bytes, got " + std::to_string(raw.size()));
    }
    FixedBytes out;
    std::copy(raw.begin(), raw.end(), out.bytes_.begin());
    return out;
  }
  static FixedBytes from_hex(std::string_view text) { return from_span(xbridge::from_hex(text)); }

  const std::array<std::uint8_t, N>& raw() const { return bytes_; }
  std::array<std::uint8_t, N>& raw() { return bytes_; }
  ByteView view() const { return {bytes_.data(), N}; }
  std::string hex() const { return to_hex(view()); }
  bool is_zero() const {
    for (auto b : bytes_) {
      if (b != 0) return false;
    }
    return true;
  }

  auto operator<=>(const FixedBytes&) const = default;

 private:
  std::array<std::uint8_t, N> bytes_;
};

using Address = FixedBytes<20>;
using Hash32 = FixedBytes<32>;

/// Lowercase 0x-prefixed form used for every address equality check.
inline std::string canonical_address(const Address& a) { return a.hex(); }

/// True when `text` is 0x followed by exactly 40 hex digits (any case).
bool looks_like_address(std::string_view text);

/// Parses a decimal or 0x-hex string; throws ParseError when the value needs more than 256 bits.
UInt256 parse_uint256(std::string_view text);
std::string to_decimal(const UInt256& v);

UInt256 uint256_from_be(ByteView word);
std::array<std::uint8_t, 32> uint256_to_be(const UInt256& v);

}  // namespace xbridge

template <std::size_t N>
struct std::hash<xbridge::FixedBytes<N>> {
  std::size_t operator()(const xbridge::FixedBytes<N>& b) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto byte : b.raw()) {
      h = (h ^ byte) * 1099511628211ull;
    }
    return h;
  }
};
