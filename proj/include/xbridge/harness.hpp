#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xbridge/abi.hpp"
#include "xbridge/domain.hpp"
#include "xbridge/examiner.hpp"
#include "xbridge/inference.hpp"
#include "xbridge/pairer.hpp"

namespace xbridge {

using HashPair = std::pair<Hash32, Hash32>;
using HashPairs = std::set<HashPair>;

struct Dataset {
  std::vector<TransactionInstance> source;
  std::vector<TransactionInstance> destination;
};

/// Decodes every raw transaction. Data problems become diagnostics
/// ("<hash>: <message>"), never exceptions.
std::vector<TransactionInstance> decode_all(std::span<const abi::RawTransaction> raw, const abi::Registry& registry,
                                            std::vector<std::string>* diagnostics = nullptr);

struct PipelineOptions {
  PairingParams params;
  InferenceOptions inference;
  ExaminerOptions examiner;
  PairOptions pairing;
};

/// How a single quintuple is chosen from a category's candidates.
enum class Selection { Examiner, TopOne };

struct SideRun {
  Side side = Side::Source;
  std::vector<Category> categories;
  std::vector<Inference> inferences;
  /// Only populated under Selection::Examiner.
  ExaminationReport report;
  /// Indexed like `categories`.
  std::vector<std::optional<Quintuple>> quintuples;
  std::vector<Identifier> identifiers;
  std::size_t extraction_failures = 0;
  std::vector<std::string> diagnostics;
};

struct PipelineRun {
  SideRun source;
  SideRun destination;
  std::vector<Pair> pairs;
};

/// categorize -> infer -> examine (or take top-1) -> extract -> pair.
PipelineRun run_pipeline(const Dataset& data, const Provider& provider, const PipelineOptions& options,
                         Selection selection = Selection::Examiner);

/// Identifiers of every member of every category that has a quintuple.
std::vector<Identifier> extract_identifiers(std::span<const TransactionInstance> txs,
                                            std::span<const Category> categories,
                                            std::span<const std::optional<Quintuple>> quintuples,
                                            const PairingParams& params, std::size_t* failures = nullptr,
                                            std::vector<std::string>* diagnostics = nullptr);

HashPairs pair_set(std::span<const Pair> pairs);

/// Truth pair whose source has the smallest (timestamp, hash); nullopt for empty truth.
std::optional<HashPair> earliest_truth_pair(const HashPairs& truth, const Dataset& data);

/// Both sides sorted by (timestamp, hash) and paired positionally, starting at the anchor.
HashPairs baseline_chronological(const Dataset& data, const HashPair& anchor);

struct SimilarityOptions {
  /// Run the examiner on the lexical top-k instead of taking top-1.
  bool with_examiner = false;
  /// Apply the type prefilter before choosing (the hybrid baseline).
  bool prefilter = false;
};

PipelineRun baseline_similarity(const Dataset& data, const RoleLexicon& lexicon, const PipelineOptions& options,
                                const SimilarityOptions& similarity = {});

struct AblationRow {
  Side side = Side::Source;
  /// Sum over categories of C(|fields|, 5).
  BigInt combinations = 0;
  /// Sum over categories of the product of candidate counts per role.
  BigInt candidates = 0;
  /// Categories left with exactly one quintuple.
  std::size_t survivors = 0;
  /// Number of categories.
  std::size_t categories = 0;
};

std::vector<AblationRow> ablation_report(const PipelineRun& run);

struct SweepCell {
  std::int64_t timewindow = 0;
  double fee_rate = 0.0;
  Scores scores;
};

/// Pairing-only sweep over a fixed set of identifiers; cells run concurrently.
std::vector<SweepCell> sweep(std::span<const Identifier> sources, std::span<const Identifier> destinations,
                             const PairingParams& base, std::span<const std::int64_t> timewindows,
                             std::span<const double> fee_rates, const HashPairs& truth);

std::string sweep_csv(std::span<const SweepCell> cells);

}  // namespace xbridge
