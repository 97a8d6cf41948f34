#include <doctest.h>

#include <filesystem>

#include "xbridge/categorizer.hpp"
#include "xbridge/harness.hpp"
#include "xbridge/json_io.hpp"
#include "xbridge/simulator.hpp"

using namespace xbridge;

namespace {

sim::ScenarioConfig small(std::uint64_t seed) {
  sim::ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.n_transfers = 150;
  cfg.decoy_field_rate = 0.5;
  cfg.decoy_tx_rate = 0.2;
  return cfg;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("generation is deterministic in the config") {
    auto a = sim::generate(small(3));
    auto b = sim::generate(small(3));
    auto c = sim::generate(small(4));
    CHECK(a.source == b.source);
    CHECK(a.destination == b.destination);
    CHECK(a.truth.pairs() == b.truth.pairs());
    CHECK(a.source != c.source);
  }

  TEST_CASE("raw encodings decode back to the planted trees") {
    auto s = sim::generate(small(5));
    auto reg = s.registry();
    std::vector<std::string> diag;
    auto src = decode_all(s.source_raw, reg, &diag);
    auto dst = decode_all(s.destination_raw, reg, &diag);
    CHECK(diag.empty());
    CHECK(src == s.source);
    CHECK(dst == s.destination);
  }

  TEST_CASE("truth is embedded in the planted values") {
    auto cfg = small(6);
    auto s = sim::generate(cfg);
    CHECK(s.truth.transfers.size() == cfg.n_transfers);
    CHECK(s.source.size() == cfg.n_transfers + static_cast<std::size_t>(cfg.decoy_tx_rate * cfg.n_transfers));
    std::map<Hash32, const TransactionInstance*> by_hash;
    for (const auto& tx : s.source) by_hash[tx.tx_hash] = &tx;
    for (const auto& tx : s.destination) by_hash[tx.tx_hash] = &tx;
    for (const auto& t : s.truth.transfers) {
      REQUIRE(by_hash.contains(t.source_hash));
      REQUIRE(by_hash.contains(t.destination_hash));
      CHECK(by_hash[t.source_hash]->timestamp == t.ts_source);
      CHECK(by_hash[t.destination_hash]->timestamp == t.ts_destination);
      CHECK(t.ts_destination - t.ts_source >= cfg.delay_min);
      CHECK(t.ts_destination - t.ts_source <= cfg.delay_max);
      CHECK(t.amount_destination <= t.amount_source);
    }

    auto cats = categorize(s.source);
    auto dcats = categorize(s.destination);
    cats.insert(cats.end(), dcats.begin(), dcats.end());
    for (const auto& ct : s.truth.categories) {
      auto it = std::find_if(cats.begin(), cats.end(), [&](const Category& c) { return c.key == ct.key; });
      REQUIRE(it != cats.end());
      CHECK(it->field_set.size() == ct.field_count);
      const auto& txs = ct.side == Side::Source ? s.source : s.destination;
      for (auto r : kAllRoles) {
        REQUIRE_FALSE(ct.roles[r].empty());
        for (auto m : it->members) {
          auto first = resolve(txs[m], ct.roles[r].front());
          REQUIRE(first);
          for (const auto& p : ct.roles[r]) CHECK(canonical_key(*resolve(txs[m], p)) == canonical_key(*first));
        }
      }
    }
  }

  TEST_CASE("replay applies the rules to planted values") {
    auto cfg = small(7);
    cfg.late_rate = 0.3;
    auto s = sim::generate(cfg);
    PairingParams p = s.params;
    auto all = sim::replay_truth(s.truth, p);
    std::size_t late = 0;
    for (const auto& t : s.truth.transfers) late += t.ts_destination - t.ts_source > p.timewindow ? 1 : 0;
    CHECK(late > 0);
    CHECK(all.size() == s.truth.transfers.size() - late);

    p.fee_rate = FeeRate::from_ppb(0);
    auto strict = sim::replay_truth(s.truth, p);
    for (const auto& t : s.truth.transfers) {
      if (t.amount_destination != t.amount_source) CHECK_FALSE(strict.contains({t.source_hash, t.destination_hash}));
    }
  }

  TEST_CASE("empty scenario and invalid configs") {
    auto cfg = small(1);
    cfg.n_transfers = 0;
    auto s = sim::generate(cfg);
    CHECK(s.truth.transfers.empty());
    CHECK(s.source.empty());

    auto bad = [](auto mutate) {
      sim::ScenarioConfig c;
      mutate(c);
      return c;
    };
    CHECK_THROWS_AS(bad([](auto& c) { c.decoy_field_rate = 1.5; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& c) { c.fields_min = 4; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& c) { c.destination_chain = c.source_chain; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad([](auto& c) { c.source_internal_id = 56; }).validate(), std::invalid_argument);
    CHECK_THROWS_AS(sim::config_from_json(nlohmann::ordered_json{{"n_transfers", "many"}}), std::invalid_argument);
    auto round = sim::config_from_json(sim::config_to_json(small(9)));
    CHECK(sim::config_to_json(round) == sim::config_to_json(small(9)));
  }

  TEST_CASE("motivating category has nine logs and 144 fields") {
    auto cfg = small(2);
    cfg.motivating_category = true;
    auto s = sim::generate(cfg);
    auto it = std::find_if(s.truth.categories.begin(), s.truth.categories.end(),
                           [](const sim::CategoryTruth& c) { return c.field_count == 144; });
    REQUIRE(it != s.truth.categories.end());
    CHECK(it->log_count == 9);
    CHECK(it->decoy);
    auto cats = categorize(s.source);
    auto cat = std::find_if(cats.begin(), cats.end(), [&](const Category& c) { return c.key == it->key; });
    REQUIRE(cat != cats.end());
    CHECK(cat->field_set.size() == 144);
    CHECK(s.source[cat->members.front()].logs.size() == 9);
    CHECK(choose(cat->field_set.size(), 5) == BigInt(481'008'528));
  }

  TEST_CASE("scenario files round trip") {
    auto s = sim::generate(small(8));
    auto dir = std::filesystem::temp_directory_path() / "xbridge_sim_test";
    std::filesystem::remove_all(dir);
    sim::write_scenario(s, dir);
    CHECK(read_instances(dir / "source.jsonl") == s.source);
    CHECK(read_truth_csv(dir / "truth_pairs.csv") == s.truth.pairs());
    auto params = params_from_json(read_json_file(dir / "pairing_params.json"));
    CHECK(params.chain_alias == s.params.chain_alias);
    CHECK(params.token_alias == s.params.token_alias);
    auto transfers = read_json_lines(dir / "truth_transfers.jsonl");
    REQUIRE(transfers.size() == s.truth.transfers.size());
    auto t0 = sim::transfer_from_json(transfers.front());
    CHECK(t0.source_hash == s.truth.transfers.front().source_hash);
    CHECK(t0.amount_destination == s.truth.transfers.front().amount_destination);
    std::filesystem::remove_all(dir);
  }
}
