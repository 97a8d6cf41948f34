#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xbridge/domain.hpp"
#include "xbridge/instance.hpp"

namespace xbridge {

/// Weighted terms per role. Weights lie in (0, 1].
struct RoleLexicon {
  RoleMap<std::map<std::string, double>> terms;

  /// {"D": {"receiver": 1.0, ...}, "C": {...}, ...}; throws std::invalid_argument.
  static RoleLexicon from_json(const nlohmann::ordered_json& j);
  static RoleLexicon load(const std::filesystem::path& path);
};

struct ProviderResponse {
  RoleMap<std::vector<Candidate>> roles;
  std::vector<std::string> diagnostics;
};

using Sample = std::vector<const TransactionInstance*>;

/// min(n, |members|) members chosen deterministically from `seed` and the
/// category key. Throws std::invalid_argument for an empty category or n == 0.
Sample sample_category(const Category& cat, std::span<const TransactionInstance> txs, std::size_t n, std::uint64_t seed);

/// Splits on brackets, dots and other punctuation, then camelCase and
/// letter/digit boundaries; lowercases; drops purely numeric pieces.
std::vector<std::string> tokenize_path(std::string_view rendered);

/// Cosine similarity between the path's term-frequency vector and the role's
/// weight vector. Zero when no term overlaps.
double lexical_score(const std::vector<std::string>& tokens, const std::map<std::string, double>& weights);

/// Top-k fields per role by lexical score (zero scores omitted), confidence
/// normalised to the best score, ties broken by rendered path.
ProviderResponse lexical_propose(const Category& cat, const RoleLexicon& lexicon, std::size_t k);

using AllowedFields = RoleMap<std::set<std::string>>;

/// D and T keep address/text fields; C, A and Ts keep unsigned-integer fields.
/// A field qualifies only when every sampled instance agrees on its kind.
AllowedFields type_prefilter(const Category& cat, const Sample& sample);

struct Inference {
  CandidateQuintuple candidates;
  bool inferable = false;
  std::vector<std::string> diagnostics;
};

/// Intersects the provider's top-k with the prefilter (when given). A role
/// left empty widens to the whole prefilter set at uniform confidence; a role
/// still empty makes the category uninferable.
Inference compose_candidates(const ProviderResponse& response, const AllowedFields* prefilter, std::size_t k);

class Provider {
 public:
  virtual ~Provider() = default;
  /// Must be safe to call concurrently.
  virtual ProviderResponse propose(const Category& cat, const Sample& sample) const = 0;
};

class LexicalProvider : public Provider {
 public:
  LexicalProvider(RoleLexicon lexicon, std::size_t k) : lexicon_(std::move(lexicon)), k_(k) {}
  ProviderResponse propose(const Category& cat, const Sample& sample) const override;

 private:
  RoleLexicon lexicon_;
  std::size_t k_;
};

struct InferenceOptions {
  std::size_t sample_size = 3;
  std::size_t top_k = 5;
  std::uint64_t seed = 7;
  bool prefilter = true;
  /// Cap on concurrent provider calls.
  std::size_t max_in_flight = 4;
};

/// Runs inference for every category; results are indexed like `categories`.
/// Categories with fewer than five fields are marked uninferable without a provider call.
std::vector<Inference> infer_all(std::span<const Category> categories, std::span<const TransactionInstance> txs,
                                 const Provider& provider, const InferenceOptions& options);

}  // namespace xbridge
