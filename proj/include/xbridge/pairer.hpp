#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xbridge/domain.hpp"
#include "xbridge/instance.hpp"

namespace xbridge {

struct Identifier {
  std::string destination;
  ChainId counterpart_chain = 0;
  std::string token;
  UInt256 amount = 0;
  std::int64_t timestamp = 0;
  Side side = Side::Source;
  ChainId own_chain = 0;
  /// Position of the instance in its dataset.
  std::size_t index = 0;
  Hash32 hash;
};

/// Resolves and canonicalises the five values. nullopt (reason in `error`)
/// when a path is missing or a value has the wrong shape.
std::optional<Identifier> extract_identifier(const TransactionInstance& tx, std::size_t index, const Quintuple& qt,
                                             const PairingParams& params, std::string* error = nullptr);

/// Evaluates all six pairing rules; the bool is their conjunction. The amount
/// rule divides by the source amount and fails when it is zero.
std::pair<bool, RuleTrace> match_pair(const Identifier& src, const Identifier& dst, const PairingParams& params);

struct PairOptions {
  /// Each destination serves at most one source.
  bool consume = true;
  /// false: emit every rule-satisfying (src, dst) combination instead of the earliest one.
  bool earliest_only = true;
};

/// Indexed pairing. Sources are visited in ascending (timestamp, hash) order
/// and take the earliest (timestamp, hash) satisfying destination.
std::vector<Pair> pair_all(std::span<const Identifier> sources, std::span<const Identifier> destinations,
                           const PairingParams& params, const PairOptions& options = {});

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t predicted = 0;
  std::size_t truth = 0;
  std::size_t correct = 0;
};

Scores score(std::span<const Pair> pairs, const std::set<std::pair<Hash32, Hash32>>& truth);
Scores score(const std::set<std::pair<Hash32, Hash32>>& predicted, const std::set<std::pair<Hash32, Hash32>>& truth);

}  // namespace xbridge
