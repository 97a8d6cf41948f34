#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "xbridge/domain.hpp"
#include "xbridge/inference.hpp"
#include "xbridge/instance.hpp"

namespace xbridge {

enum class FlowDirection { Inflow, Outflow };

struct AssetFlow {
  FlowDirection direction = FlowDirection::Outflow;
  /// Canonical token id (see PairingParams::canonical_token).
  std::string token;
  UInt256 amount = 0;

  auto operator<=>(const AssetFlow&) const = default;
};

/// Flows relative to tx.sender: ERC-20 Transfer logs leaving or reaching the
/// sender, plus a native outflow when native_value > 0. Zero amounts dropped.
std::vector<AssetFlow> analyze_asset_flow(const TransactionInstance& tx, const PairingParams& params);

using FieldPair = std::pair<FieldPath, FieldPath>;

/// (F_A, F_T) combinations whose extracted values equal some flow exactly.
std::vector<FieldPair> phase1_filter(const TransactionInstance& tx, std::span<const Candidate> amount,
                                     std::span<const Candidate> token, const PairingParams& params);

/// Per-chain, time-sorted view of a dataset.
class ChainTimeIndex {
 public:
  explicit ChainTimeIndex(std::span<const TransactionInstance> txs);

  /// Indices of instances on `chain` with lo <= timestamp <= hi, ascending by time.
  std::vector<std::size_t> range(ChainId chain, std::int64_t lo, std::int64_t hi) const;

 private:
  std::map<ChainId, std::vector<std::pair<std::int64_t, std::size_t>>> by_chain_;
};

/// Counterpart instances on the chain named by `chain_value` (after alias
/// resolution) within the time window around `ts`. A source-side search looks
/// forward ([ts, ts+tw]); a destination-side search looks back ([ts-tw, ts]);
/// `symmetric` widens either to [ts-tw, ts+tw]. nullopt when the chain id is unknown.
std::optional<std::vector<std::size_t>> find_by_chain_timestamp(const ChainTimeIndex& index, const Value& chain_value,
                                                                std::int64_t ts, std::int64_t timewindow,
                                                                const PairingParams& params, Side perspective,
                                                                bool symmetric);

/// What the examiner needs from the other side of the bridge.
struct Counterpart {
  std::span<const TransactionInstance> txs;
  ChainTimeIndex index;
  /// Canonical keys of each instance's D-candidate values.
  std::vector<std::unordered_set<std::string>> d_values;
};

/// D-candidates come from the counterpart's inference; categories without
/// candidates contribute every address-like leaf.
Counterpart build_counterpart(std::span<const TransactionInstance> txs, std::span<const Category> categories,
                              std::span<const Inference> inferences);

using FieldTriple = std::tuple<FieldPath, FieldPath, FieldPath>;

/// (F_D, F_C, F_Ts) combinations for which some located counterpart carries V_D
/// among its D-candidate values.
std::vector<FieldTriple> phase2_match(const TransactionInstance& tx, std::span<const Candidate> destination,
                                      std::span<const Candidate> chain, std::span<const Candidate> timestamp,
                                      const Counterpart& counterpart, const PairingParams& params, Side perspective,
                                      bool symmetric, std::vector<std::string>* diagnostics = nullptr);

using TxRefs = std::vector<const TransactionInstance*>;

/// True iff every field resolves in every instance and all fields agree per instance.
bool check_consistency(const TxRefs& txs, std::span<const FieldPath> fields);

/// True iff the set of values the field takes over `txs` has a size other than 1.
bool is_unique(const TxRefs& txs, const FieldPath& field);

struct ExaminerOptions {
  std::size_t validation_sample = 200;
  std::uint64_t seed = 11;
  bool symmetric = false;
  /// Phase-2 survivors validated on fewer than this fraction of the best
  /// field's transactions (same role) are dropped before phase 3. 0 keeps every field.
  double min_support = 0.5;
};

struct PhaseCounts {
  RoleMap<std::size_t> input;
  RoleMap<std::size_t> phase1;
  RoleMap<std::size_t> phase2;
  RoleMap<std::size_t> phase3;
};

struct CategoryExamination {
  std::string key;
  std::size_t members = 0;
  std::optional<Quintuple> quintuple;
  /// Empty when a quintuple was chosen.
  std::string rejection;
  PhaseCounts counts;
  std::vector<std::string> diagnostics;
};

struct ExaminationReport {
  Side side = Side::Source;
  std::vector<CategoryExamination> categories;

  std::size_t survivors() const;
};

/// Runs the three-phase examination for every category of one side.
/// `inferences` is indexed like `categories`.
ExaminationReport examine(Side side, std::span<const Category> categories, std::span<const Inference> inferences,
                          std::span<const TransactionInstance> txs, const Counterpart& counterpart,
                          const PairingParams& params, const ExaminerOptions& options);

}  // namespace xbridge
