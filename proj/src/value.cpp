#include "xbridge/value.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace xbridge {

void Record::add(std::string name, Value value) {
  if (find(name) != nullptr) {
    throw std::invalid_argument("duplicate record name: " + name);
  }
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

const Value* Record::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return &values_[i];
  }
  return nullptr;
}

bool Record::operator==(const Record& other) const {
  return names_ == other.names_ && values_ == other.values_;
}

namespace {

constexpr std::array<std::string_view, 8> kKindNames = {"uint", "int",  "address", "bool",
                                                        "bytes", "text", "list",    "record"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view kind_name(ValueKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

ValueKind kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ValueKind>(i);
  }
  throw ParseError("unknown value kind: " + std::string(name));
}

std::optional<std::string> as_canonical_address(const Value& v) {
  if (v.kind() == ValueKind::Address) return canonical_address(v.as_address());
  if (v.kind() == ValueKind::Text && looks_like_address(v.as_text())) return lower(v.as_text());
  return std::nullopt;
}

std::string canonical_key(const Value& v) {
  switch (v.kind()) {
    case ValueKind::UInt:
      return "u:" + v.as_uint().str();
    case ValueKind::Int:
      return v.as_int() >= 0 ? "u:" + v.as_int().str() : "i:" + v.as_int().str();
    case ValueKind::Address:
      return "a:" + canonical_address(v.as_address());
    case ValueKind::Bool:
      return v.as_bool() ? "b:1" : "b:0";
    case ValueKind::Bytes:
      return "x:" + to_hex(v.as_bytes());
    case ValueKind::Text:
      if (looks_like_address(v.as_text())) return "a:" + lower(v.as_text());
      return "t:" + v.as_text();
    case ValueKind::List: {
      std::string out = "l[";
      for (const auto& e : v.as_list()) out += canonical_key(e) + ",";
      return out + "]";
    }
    case ValueKind::Record: {
      const auto& r = v.as_record();
      std::string out = "r{";
      for (std::size_t i = 0; i < r.size(); ++i) out += r.name_at(i) + "=" + canonical_key(r.value_at(i)) + ",";
      return out + "}";
    }
  }
  return {};
}

std::string to_display(const Value& v) {
  switch (v.kind()) {
    case ValueKind::UInt:
      return v.as_uint().str();
    case ValueKind::Int:
      return v.as_int().str();
    case ValueKind::Address:
      return canonical_address(v.as_address());
    case ValueKind::Bool:
      return v.as_bool() ? "true" : "false";
    case ValueKind::Bytes:
      return to_hex(v.as_bytes());
    case ValueKind::Text:
      return "\"" + v.as_text() + "\"";
    case ValueKind::List: {
      std::string out = "[";
      const auto& l = v.as_list();
      for (std::size_t i = 0; i < l.size(); ++i) out += (i ? ", " : "") + to_display(l[i]);
      return out + "]";
    }
    case ValueKind::Record: {
      const auto& r = v.as_record();
      std::string out = "{";
      for (std::size_t i = 0; i < r.size(); ++i) {
        out += (i ? ", " : "") + r.name_at(i) + ": " + to_display(r.value_at(i));
      }
      return out + "}";
    }
  }
  return {};
}

}  // namespace xbridge
