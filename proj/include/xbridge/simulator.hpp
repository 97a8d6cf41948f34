#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xbridge/abi.hpp"
#include "xbridge/domain.hpp"
#include "xbridge/instance.hpp"

namespace xbridge::sim {

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::size_t n_transfers = 1000;

  ChainId source_chain = 1;
  ChainId destination_chain = 56;
  /// Bridge-internal ids; half the categories carry these instead of canonical ids.
  std::uint64_t source_internal_id = 101;
  std::uint64_t destination_internal_id = 102;

  std::size_t categories_per_side = 4;
  /// Leaf-field count per category is drawn from [fields_min, fields_max].
  std::size_t fields_min = 40;
  std::size_t fields_max = 64;
  /// Logs per transaction (Transfer and bridge events included) drawn from [logs_min, logs_max].
  std::size_t logs_min = 2;
  std::size_t logs_max = 4;

  /// Fraction of categories per side carrying misleading same-lexicon fields.
  double decoy_field_rate = 0.0;
  /// Unpaired noise transactions per side, as a fraction of n_transfers.
  double decoy_tx_rate = 0.0;
  /// Share of source categories that move the native asset instead of an ERC-20.
  double native_rate = 0.25;

  /// Fee fraction drawn uniformly from [0, fee_max].
  double fee_max = 0.1;
  /// Settlement delay in seconds, uniform in [delay_min, delay_max].
  std::int64_t delay_min = 90;
  std::int64_t delay_max = 1800;
  /// Share of transfers delayed uniformly in (delay_max, late_delay_max] instead.
  double late_rate = 0.0;
  std::int64_t late_delay_max = 14400;

  std::int64_t start_time = 1'700'000'000;
  /// Mean seconds between consecutive source transfers.
  std::int64_t mean_interarrival = 30;

  /// Give the first source category nine logs and 144 leaf fields, with decoys.
  bool motivating_category = false;

  /// Throws std::invalid_argument on contradictions.
  void validate() const;
};

ScenarioConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ScenarioConfig& cfg);

struct CategoryTruth {
  Side side = Side::Source;
  std::string function;
  std::string key;
  bool native = false;
  bool decoy = false;
  std::size_t field_count = 0;
  std::size_t log_count = 0;
  /// Every path that carries the role's value in every member; the first is the primary.
  RoleMap<std::vector<FieldPath>> roles;
};

struct TransferTruth {
  Hash32 source_hash;
  Hash32 destination_hash;
  std::string receiver;
  std::string token;
  UInt256 amount_source = 0;
  UInt256 amount_destination = 0;
  std::int64_t ts_source = 0;
  std::int64_t ts_destination = 0;
  ChainId source_chain = 0;
  ChainId destination_chain = 0;
};

struct Truth {
  std::vector<TransferTruth> transfers;
  std::vector<CategoryTruth> categories;

  std::set<std::pair<Hash32, Hash32>> pairs() const;
};

struct Contract {
  std::string name;
  Address address;
  std::vector<abi::FunctionDescriptor> functions;
  std::vector<abi::EventDescriptor> events;
};

struct Scenario {
  ScenarioConfig config;
  PairingParams params;
  std::vector<Contract> contracts;
  std::vector<abi::RawTransaction> source_raw;
  std::vector<abi::RawTransaction> destination_raw;
  /// Pre-encoding trees, index-aligned with the raw vectors.
  std::vector<TransactionInstance> source;
  std::vector<TransactionInstance> destination;
  Truth truth;

  abi::Registry registry() const;
};

/// Deterministic in `cfg` (including its seed).
Scenario generate(const ScenarioConfig& cfg);

/// Applies the pairing rules directly to the planted values: the pairs a
/// perfect pipeline could recover under `params`.
std::set<std::pair<Hash32, Hash32>> replay_truth(const Truth& truth, const PairingParams& params);

nlohmann::ordered_json truth_to_json(const Truth& truth);
nlohmann::ordered_json transfer_to_json(const TransferTruth& t);
/// Throws std::invalid_argument on a malformed record.
TransferTruth transfer_from_json(const nlohmann::ordered_json& j);

/// Writes abi/<contract>.json, raw_source.jsonl, raw_destination.jsonl,
/// source.jsonl, destination.jsonl, truth_pairs.csv, truth_quintuples.json,
/// truth_transfers.jsonl, pairing_params.json and scenario.json.
void write_scenario(const Scenario& s, const std::filesystem::path& dir);

}  // namespace xbridge::sim
