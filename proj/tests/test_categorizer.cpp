#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "xbridge/categorizer.hpp"
#include "xbridge/rng.hpp"

using namespace xbridge;

namespace {

TransactionInstance with_args(const std::string& fn, const std::vector<std::string>& names, std::int64_t ts) {
  TransactionInstance tx;
  tx.chain = 1;
  tx.timestamp = ts;
  tx.call.function = fn;
  for (const auto& n : names) tx.call.args.add(n, Value::uint(static_cast<std::uint64_t>(ts)));
  return tx;
}

}  // namespace

TEST_SUITE("categorizer") {
  TEST_CASE("binomial counts match the multiplicative oracle") {
    CHECK(choose(144, 5) == BigInt(481'008'528));
    CHECK(oracle::choose(144, 5) == 481'008'528);
    for (std::size_t n = 0; n <= 60; ++n) {
      for (std::size_t k = 0; k <= 8; ++k) CHECK(choose(n, k) == BigInt(oracle::choose(n, k)));
    }
    CHECK(choose(4, 5) == 0);
    CHECK(choose(300, 150) > BigInt(1) << 200);
  }

  TEST_CASE("field sets are sorted and deduplicated") {
    TransactionInstance tx = with_args("f", {"b", "a"}, 1);
    List items{Value::uint(1), Value::uint(2)};
    Record hop;
    hop.add("x", Value::uint(1));
    tx.call.args.add("hops", Value(List{Value(hop), Value(hop)}));
    auto fields = fields_of(tx);
    CHECK(std::is_sorted(fields.begin(), fields.end()));
    CHECK(std::set<std::string>(fields.begin(), fields.end()).size() == fields.size());
    CHECK(std::count(fields.begin(), fields.end(), "transaction[f].hops.x") == 1);
    CHECK(std::count(fields.begin(), fields.end(), "tx.timestamp") == 1);
  }

  TEST_CASE("categories partition instances by exact field set") {
    std::vector<TransactionInstance> txs = {
        with_args("f", {"a", "b"}, 1), with_args("g", {"a", "b"}, 2), with_args("f", {"b", "a"}, 3),
        with_args("f", {"a", "b", "c"}, 4), with_args("g", {"a", "b"}, 5), with_args("g", {"a", "b"}, 6),
    };
    auto cats = categorize(txs);
    REQUIRE(cats.size() == 3);
    CHECK(cats[0].members == std::vector<std::size_t>{1, 4, 5});
    CHECK(cats[1].members.size() == 2);
    CHECK(cats[2].members == std::vector<std::size_t>{3});
    CHECK(cats[0].key == category_key(cats[0].field_set));
    CHECK(cats[0].key.size() == 64);

    auto idx = category_index(cats, txs.size());
    for (std::size_t c = 0; c < cats.size(); ++c) {
      for (auto m : cats[c].members) CHECK(idx[m] == c);
    }
  }

  TEST_CASE("random instances: every member shares its category's field set") {
    Rng rng(9);
    const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f", "g"};
    std::vector<TransactionInstance> txs;
    for (int i = 0; i < 300; ++i) {
      std::vector<std::string> chosen;
      for (const auto& n : names) {
        if (rng.chance(0.5)) chosen.push_back(n);
      }
      txs.push_back(with_args(rng.chance(0.5) ? "f" : "g", chosen, i));
    }
    auto cats = categorize(txs);
    std::size_t total = 0;
    std::set<std::string> keys;
    for (std::size_t c = 0; c < cats.size(); ++c) {
      total += cats[c].members.size();
      CHECK(keys.insert(cats[c].key).second);
      CHECK(std::is_sorted(cats[c].members.begin(), cats[c].members.end()));
      for (auto m : cats[c].members) CHECK(fields_of(txs[m]) == cats[c].field_set);
      if (c > 0) CHECK(cats[c - 1].members.size() >= cats[c].members.size());
    }
    CHECK(total == txs.size());
  }

  TEST_CASE("combination and candidate space sizes") {
    Category big;
    big.field_set.resize(144);
    Category small;
    small.field_set.resize(4);
    std::vector<Category> cats = {big, small};
    CHECK(combination_count(cats) == BigInt(481'008'528));

    CandidateQuintuple q;
    q.roles[Role::D].resize(3);
    q.roles[Role::C].resize(2);
    q.roles[Role::T].resize(1);
    q.roles[Role::A].resize(5);
    q.roles[Role::Ts].resize(4);
    std::vector<CandidateQuintuple> qs = {q, q};
    CHECK(candidate_space_size(qs) == BigInt(240));
  }
}
