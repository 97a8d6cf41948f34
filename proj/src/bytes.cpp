#include "xbridge/bytes.hpp"

#include <cctype>

namespace xbridge {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string_view strip_prefix(std::string_view text) {
  if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
  }
  return text;
}

}  // namespace

std::string to_hex(ByteView bytes, bool prefix) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2 + 2);
  if (prefix) out += "0x";
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0x0f];
  }
  return out;
}

Bytes from_hex(std::string_view text) {
  text = strip_prefix(text);
  if (text.size() % 2 != 0) {
    throw ParseError("odd-length hex string");
  }
  Bytes out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_digit(text[2 * i]);
    int lo = hex_digit(text[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw ParseError("invalid hex digit");
    }
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

bool looks_like_address(std::string_view text) {
  if (text.size() != 42 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) return false;
  for (std::size_t i = 2; i < text.size(); ++i) {
    if (hex_digit(text[i]) < 0) return false;
  }
  return true;
}

UInt256 parse_uint256(std::string_view text) {
  if (text.empty()) throw ParseError("empty integer");
  BigInt v = 0;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    for (char c : text.substr(2)) {
      int d = hex_digit(c);
      if (d < 0) throw ParseError("invalid hex integer: " + std::string(text));
      v = (v << 4) | d;
    }
  } else {
    for (char c : text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw ParseError("invalid decimal integer: " + std::string(text));
      }
      v = v * 10 + (c - '0');
    }
  }
  if (v != 0 && boost::multiprecision::msb(v) >= 256) {
    throw ParseError("integer exceeds 256 bits: " + std::string(text));
  }
  return static_cast<UInt256>(v);
}

std::string to_decimal(const UInt256& v) { return v.str(); }

UInt256 uint256_from_be(ByteView word) {
  UInt256 v = 0;
  for (auto b : word) {
    v = (v << 8) | b;
  }
  return v;
}

std::array<std::uint8_t, 32> uint256_to_be(const UInt256& v) {
  std::array<std::uint8_t, 32> out{};
  UInt256 x = v;
  for (int i = 31; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x & 0xff);
    x >>= 8;
  }
  return out;
}

}  // namespace xbridge
