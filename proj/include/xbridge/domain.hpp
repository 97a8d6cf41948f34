#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xbridge/bytes.hpp"
#include "xbridge/field_path.hpp"
#include "xbridge/instance.hpp"

namespace xbridge {

/// Quintuple roles: destination address, counterpart chain, token, amount, timestamp.
enum class Role : std::uint8_t { D = 0, C = 1, T = 2, A = 3, Ts = 4 };

inline constexpr std::array<Role, 5> kAllRoles = {Role::D, Role::C, Role::T, Role::A, Role::Ts};

std::string_view role_name(Role r);
/// Accepts the short names (D, C, T, A, Ts) and the long ones
/// (destination, chain, token, amount, timestamp).
std::optional<Role> role_from_name(std::string_view name);

template <typename T>
class RoleMap {
 public:
  T& operator[](Role r) { return items_[static_cast<std::size_t>(r)]; }
  const T& operator[](Role r) const { return items_[static_cast<std::size_t>(r)]; }
  bool operator==(const RoleMap&) const = default;

 private:
  std::array<T, 5> items_{};
};

using Quintuple = RoleMap<FieldPath>;

struct Candidate {
  FieldPath path;
  double confidence = 0.0;

  bool operator==(const Candidate&) const = default;
};

/// Per-role candidate fields, confidences sorted descending.
struct CandidateQuintuple {
  RoleMap<std::vector<Candidate>> roles;

  bool complete() const;
  bool operator==(const CandidateQuintuple&) const = default;
};

/// Instances sharing one exact field set.
struct Category {
  std::vector<std::string> field_set;
  std::string key;
  std::vector<std::size_t> members;

  /// A quintuple needs five distinct fields.
  bool pairable() const { return field_set.size() >= 5; }
};

/// Amount tolerance held as an exact fraction (parts per billion) so
/// inclusive thresholds compare without floating-point error.
class FeeRate {
 public:
  static constexpr std::uint64_t kDenominator = 1'000'000'000;

  FeeRate() = default;
  /// Throws std::invalid_argument outside [0, 1].
  static FeeRate from_fraction(double fraction);
  static FeeRate from_ppb(std::uint64_t ppb);

  std::uint64_t ppb() const { return ppb_; }
  double fraction() const { return static_cast<double>(ppb_) / kDenominator; }

  auto operator<=>(const FeeRate&) const = default;

 private:
  std::uint64_t ppb_ = 0;
};

struct PairingParams {
  std::int64_t timewindow = 7200;
  FeeRate fee_rate = FeeRate::from_ppb(200'000'000);
  /// Bridge-internal chain id -> canonical chain id.
  std::map<std::uint64_t, ChainId> chain_alias;
  /// (canonical chain, token address) -> canonical token symbol. The zero
  /// address stands for the chain's native asset.
  std::map<std::pair<ChainId, Address>, std::string> token_alias;

  /// Resolves a chain identifier; values that are already canonical targets of
  /// the alias table map to themselves. nullopt for unknown ids.
  std::optional<ChainId> canonical_chain(const UInt256& raw) const;
  std::string canonical_token(ChainId chain, const Address& token) const;

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// Canonical token id for an extracted token value (address or text).
std::optional<std::string> canonical_token_value(const PairingParams& params, ChainId chain, const Value& v);

struct RuleCheck {
  bool pass = false;
  std::string detail;
};

/// Outcome of each pairing rule: role, destination, token, amount, chain, timestamp.
using RuleTrace = std::array<RuleCheck, 6>;

struct MatchedValues {
  std::string destination;
  ChainId counterpart_chain = 0;
  std::string token;
  UInt256 amount_source = 0;
  UInt256 amount_destination = 0;
  std::int64_t timestamp_source = 0;
  std::int64_t timestamp_destination = 0;
};

struct Pair {
  std::size_t src_index = 0;
  std::size_t dst_index = 0;
  ChainId src_chain = 0;
  ChainId dst_chain = 0;
  Hash32 src_hash;
  Hash32 dst_hash;
  MatchedValues values;
  RuleTrace rules;
};

}  // namespace xbridge
