#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "xbridge/abi.hpp"
#include "xbridge/domain.hpp"
#include "xbridge/instance.hpp"

namespace xbridge {

using Json = nlohmann::ordered_json;

/// Malformed input data (as opposed to a malformed configuration).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instance interchange document. UInt/Int leaves are decimal strings,
/// Address/Bytes 0x-hex; a "kinds" map from rendered leaf path to value kind
/// keeps string leaves type-faithful on the way back in.
Json instance_to_json(const TransactionInstance& tx);
TransactionInstance instance_from_json(const Json& j);

Json raw_to_json(const abi::RawTransaction& raw);
abi::RawTransaction raw_from_json(const Json& j);

Json params_to_json(const PairingParams& p);
PairingParams params_from_json(const Json& j);

Json quintuple_to_json(const Quintuple& q);
Quintuple quintuple_from_json(const Json& j);

Json candidates_to_json(const CandidateQuintuple& c);
CandidateQuintuple candidates_from_json(const Json& j);

Json pair_to_json(const Pair& p);

/// One JSON document per line; blank lines skipped. Throws DataError with the line number.
std::vector<Json> read_json_lines(const std::filesystem::path& path);
void write_json_lines(const std::filesystem::path& path, const std::vector<Json>& docs);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

std::vector<TransactionInstance> read_instances(const std::filesystem::path& path);
void write_instances(const std::filesystem::path& path, const std::vector<TransactionInstance>& txs);

using TruthPairs = std::set<std::pair<Hash32, Hash32>>;

/// CSV with header `src_hash,dst_hash`.
TruthPairs read_truth_csv(const std::filesystem::path& path);
void write_truth_csv(const std::filesystem::path& path, const TruthPairs& pairs);

}  // namespace xbridge
