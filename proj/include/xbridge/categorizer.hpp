#pragma once

#include <span>
#include <string>
#include <vector>

#include "xbridge/domain.hpp"
#include "xbridge/instance.hpp"

namespace xbridge {

/// Sorted, duplicate-free rendered paths of every leaf in the instance.
std::vector<std::string> fields_of(const TransactionInstance& tx);

/// SHA-256 hex of the newline-joined field list.
std::string category_key(const std::vector<std::string>& field_set);

/// Partitions instances by exact field-set equality. Categories come out
/// ordered by size descending, then key; members ascending by index.
std::vector<Category> categorize(std::span<const TransactionInstance> txs);

/// Index of each instance's category in `categories`.
std::vector<std::size_t> category_index(std::span<const Category> categories, std::size_t n_instances);

/// C(n, k) in exact arithmetic.
BigInt choose(std::size_t n, std::size_t k);

/// Sum over categories of C(|fields|, 5).
BigInt combination_count(std::span<const Category> categories);

/// Sum over categories of the product of per-role candidate counts.
BigInt candidate_space_size(std::span<const CandidateQuintuple> candidates);

}  // namespace xbridge
