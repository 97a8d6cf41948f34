#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xbridge/bytes.hpp"
#include "xbridge/instance.hpp"
#include "xbridge/value.hpp"

namespace xbridge::abi {

class AbiError : public std::runtime_error {
 public:
  enum class Kind {
    UnsupportedType,
    SelectorMismatch,
    Truncated,
    OffsetOutOfBounds,
    Padding,
    TopicCount,
    ValueMismatch,
    Range,
  };

  AbiError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Solidity ABI type: elementary, dynamic bytes/string, arrays and tuples.
class AbiType {
 public:
  enum class Kind { UInt, Int, Address, Bool, FixedBytes, Bytes, String, Array, Tuple };

  static AbiType uint(std::size_t bits = 256);
  static AbiType sint(std::size_t bits = 256);
  static AbiType address();
  static AbiType boolean();
  static AbiType fixed_bytes(std::size_t size);
  static AbiType bytes();
  static AbiType string();
  /// `length` nullopt means a dynamic array.
  static AbiType array(AbiType element, std::optional<std::size_t> length = std::nullopt);
  static AbiType tuple(std::vector<std::pair<std::string, AbiType>> components);

  /// Parses an elementary type string with optional array suffixes,
  /// e.g. "uint8", "address[3][]". Tuples need components and go through
  /// the JSON loader. Throws AbiError(UnsupportedType).
  static AbiType parse(std::string_view text);

  Kind kind() const { return kind_; }
  /// Bit width for integers, byte width for bytesN.
  std::size_t width() const { return width_; }
  std::optional<std::size_t> length() const { return length_; }
  const AbiType& element() const { return children_.front(); }
  const std::vector<AbiType>& components() const { return children_; }
  const std::vector<std::string>& component_names() const { return names_; }

  bool is_dynamic() const;
  /// Bytes this type occupies in a head section.
  std::size_t head_size() const;
  /// Canonical signature text, tuples expanded to "(t1,t2)".
  std::string canonical() const;

  bool operator==(const AbiType&) const = default;

 private:
  Kind kind_ = Kind::UInt;
  std::size_t width_ = 256;
  std::optional<std::size_t> length_;
  std::vector<AbiType> children_;
  std::vector<std::string> names_;
};

struct Param {
  std::string name;
  AbiType type;
  bool indexed = false;

  bool operator==(const Param&) const = default;
};

struct FunctionDescriptor {
  std::string name;
  std::vector<Param> inputs;
  bool payable = false;
};

struct EventDescriptor {
  std::string name;
  std::vector<Param> inputs;
  bool anonymous = false;
};

/// Record key used for an input; unnamed inputs become arg<i>.
std::string param_key(const Param& p, std::size_t index);

std::string canonical_signature(const FunctionDescriptor& fn);
std::string canonical_signature(const EventDescriptor& ev);

std::array<std::uint8_t, 4> selector(std::string_view signature);
Hash32 topic0(std::string_view signature);

enum class DecodeMode { Strict, Lenient };

struct DecodeResult {
  Record record;
  /// Tolerated irregularities (lenient padding, hashed indexed inputs).
  std::vector<std::string> warnings;
};

Bytes encode_call(const FunctionDescriptor& fn, const Record& args);
DecodeResult decode_call(const FunctionDescriptor& fn, ByteView input, DecodeMode mode = DecodeMode::Lenient);

struct EncodedLog {
  std::vector<Hash32> topics;
  Bytes data;
};

EncodedLog encode_log(const EventDescriptor& ev, const Record& args);
DecodeResult decode_log(const EventDescriptor& ev, std::span<const Hash32> topics, ByteView data,
                        DecodeMode mode = DecodeMode::Lenient);

/// Bare head/tail encoding of a parameter list (no selector).
Bytes encode_params(std::span<const Param> params, const Record& args);
Record decode_params(std::span<const Param> params, ByteView data, DecodeMode mode, std::vector<std::string>& warnings);

class Registry {
 public:
  void add(FunctionDescriptor fn);
  void add(EventDescriptor ev);

  /// Loads a standard Solidity JSON ABI array; unsupported entries are skipped
  /// and listed in the return value.
  std::vector<std::string> load_json(const nlohmann::json& abi);
  std::vector<std::string> load_file(const std::filesystem::path& path);

  const FunctionDescriptor* function(std::span<const std::uint8_t> selector_bytes) const;
  /// Event whose topic0 matches and whose indexed-input count fits `topic_count`.
  const EventDescriptor* event(const Hash32& topic, std::size_t topic_count) const;

  const std::vector<FunctionDescriptor>& functions() const { return functions_; }
  const std::vector<EventDescriptor>& events() const { return events_; }

 private:
  std::vector<FunctionDescriptor> functions_;
  std::vector<EventDescriptor> events_;
  std::map<std::array<std::uint8_t, 4>, std::size_t> by_selector_;
  std::map<Hash32, std::vector<std::size_t>> by_topic_;
};

nlohmann::json to_json_abi(std::span<const FunctionDescriptor> functions, std::span<const EventDescriptor> events);

struct RawLog {
  Address address;
  std::vector<Hash32> topics;
  Bytes data;
};

struct RawTransaction {
  ChainId chain = 0;
  Hash32 hash;
  std::uint64_t block_number = 0;
  std::int64_t timestamp = 0;
  Address from;
  Address to;
  UInt256 value = 0;
  Bytes input;
  std::vector<RawLog> logs;
  Side side = Side::Source;
};

struct DecodeOptions {
  DecodeMode mode = DecodeMode::Lenient;
  /// Keep undecodable logs as `unknown` placeholders so field sets reflect the log count.
  bool keep_unknown_logs = true;
};

struct DecodedInstance {
  TransactionInstance instance;
  std::vector<std::string> diagnostics;
};

inline constexpr std::string_view kUnknownName = "unknown";

/// Never throws on data problems: undecodable calls and logs become
/// `unknown` placeholder nodes and are reported in diagnostics.
DecodedInstance decode_instance(const RawTransaction& raw, const Registry& registry, const DecodeOptions& options = {});

}  // namespace xbridge::abi
