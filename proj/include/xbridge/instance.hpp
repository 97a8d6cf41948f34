#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xbridge/bytes.hpp"
#include "xbridge/field_path.hpp"
#include "xbridge/value.hpp"

namespace xbridge {

enum class Side { Source, Destination };

std::string_view side_name(Side side);
Side side_from_name(std::string_view name);
inline Side opposite(Side s) { return s == Side::Source ? Side::Destination : Side::Source; }

struct DecodedCall {
  std::string function;
  Record args;
  bool known = true;

  bool operator==(const DecodedCall&) const = default;
};

struct DecodedLog {
  std::string event;
  /// Contract that emitted the log; for ERC-20 Transfer this is the token.
  Address emitter;
  Record args;
  bool known = true;

  bool operator==(const DecodedLog&) const = default;
};

/// One transaction together with its decoded event logs, in log-index order.
struct TransactionInstance {
  ChainId chain = 0;
  Hash32 tx_hash;
  std::uint64_t block_number = 0;
  std::int64_t timestamp = 0;
  Address sender;
  Address contract;
  UInt256 native_value = 0;
  DecodedCall call;
  std::vector<DecodedLog> logs;
  Side side = Side::Source;

  bool operator==(const TransactionInstance&) const = default;
};

/// Leaf value at `path`, or nullopt when the instance has no such slot.
std::optional<Value> resolve(const TransactionInstance& tx, const FieldPath& path);

/// Visits every leaf (metadata first, then call, then logs). Paths through
/// lists repeat once per element; an empty list is itself a leaf.
void for_each_leaf(const TransactionInstance& tx,
                   const std::function<void(const FieldPath&, const Value&)>& visit);

/// Throws std::invalid_argument when an instance invariant is violated.
void validate(const TransactionInstance& tx);

}  // namespace xbridge
