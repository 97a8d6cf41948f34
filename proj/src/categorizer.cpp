#include "xbridge/categorizer.hpp"

#include <algorithm>
#include <map>

#include "xbridge/keccak.hpp"

namespace xbridge {

std::vector<std::string> fields_of(const TransactionInstance& tx) {
  std::vector<std::string> out;
  for_each_leaf(tx, [&](const FieldPath& p, const Value&) { out.push_back(p.render()); });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string category_key(const std::vector<std::string>& field_set) {
  std::string joined;
  for (std::size_t i = 0; i < field_set.size(); ++i) {
    if (i) joined += '\n';
    joined += field_set[i];
  }
  return sha256_hex(joined);
}

std::vector<Category> categorize(std::span<const TransactionInstance> txs) {
  std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < txs.size(); ++i) groups[fields_of(txs[i])].push_back(i);

  std::vector<Category> out;
  out.reserve(groups.size());
  for (auto& [fields, members] : groups) {
    Category c;
    c.key = category_key(fields);
    c.field_set = fields;
    c.members = std::move(members);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Category& a, const Category& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return a.key < b.key;
  });
  return out;
}

std::vector<std::size_t> category_index(std::span<const Category> categories, std::size_t n_instances) {
  std::vector<std::size_t> out(n_instances, categories.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    for (auto m : categories[c].members) out[m] = c;
  }
  return out;
}

BigInt choose(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

BigInt combination_count(std::span<const Category> categories) {
  BigInt total = 0;
  for (const auto& c : categories) total += choose(c.field_set.size(), 5);
  return total;
}

BigInt candidate_space_size(std::span<const CandidateQuintuple> candidates) {
  BigInt total = 0;
  for (const auto& c : candidates) {
    BigInt product = 1;
    for (auto r : kAllRoles) product *= c.roles[r].size();
    total += product;
  }
  return total;
}

}  // namespace xbridge
