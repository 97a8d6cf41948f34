#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "xbridge/bytes.hpp"

namespace xbridge {

class Value;

using List = std::vector<Value>;

/// Ordered name -> value mapping with unique names.
class Record {
 public:
  Record() = default;

  /// Throws std::invalid_argument on a duplicate name.
  void add(std::string name, Value value);

  const Value* find(std::string_view name) const;
  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Value>& values() const { return values_; }
  const std::string& name_at(std::size_t i) const { return names_[i]; }
  const Value& value_at(std::size_t i) const { return values_[i]; }

  bool operator==(const Record& other) const;

 private:
  std::vector<std::string> names_;
  std::vector<Value> values_;
};

enum class ValueKind { UInt, Int, Address, Bool, Bytes, Text, List, Record };

std::string_view kind_name(ValueKind kind);
ValueKind kind_from_name(std::string_view name);

class Value {
 public:
  using Storage = std::variant<UInt256, Int256, Address, bool, Bytes, std::string, List, Record>;

  Value() : data_(UInt256(0)) {}
  Value(UInt256 v) : data_(std::move(v)) {}
  Value(Int256 v) : data_(std::move(v)) {}
  Value(Address v) : data_(v) {}
  Value(bool v) : data_(v) {}
  Value(Bytes v) : data_(std::move(v)) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(List v) : data_(std::move(v)) {}
  Value(Record v) : data_(std::move(v)) {}

  static Value uint(std::uint64_t v) { return Value(UInt256(v)); }
  static Value text(std::string v) { return Value(std::move(v)); }

  ValueKind kind() const { return static_cast<ValueKind>(data_.index()); }
  bool is_scalar() const { return kind() != ValueKind::List && kind() != ValueKind::Record; }

  const UInt256& as_uint() const { return std::get<UInt256>(data_); }
  const Int256& as_int() const { return std::get<Int256>(data_); }
  const Address& as_address() const { return std::get<Address>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const Bytes& as_bytes() const { return std::get<Bytes>(data_); }
  const std::string& as_text() const { return std::get<std::string>(data_); }
  const List& as_list() const { return std::get<List>(data_); }
  const Record& as_record() const { return std::get<Record>(data_); }

  const Storage& storage() const { return data_; }

  bool operator==(const Value& other) const { return data_ == other.data_; }

 private:
  Storage data_;
};

/// Canonical text used for value equality across fields: addresses (and
/// address-shaped text) become lowercase hex, integers decimal. Two values
/// with equal keys are treated as the same extracted value.
std::string canonical_key(const Value& v);

/// Human-readable rendering for diagnostics and prompts.
std::string to_display(const Value& v);

/// If the value denotes an address (Address, or text shaped like one) returns its canonical form.
std::optional<std::string> as_canonical_address(const Value& v);

}  // namespace xbridge
