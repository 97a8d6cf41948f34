#include <doctest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "xbridge/pairer.hpp"

using namespace xbridge;

namespace {

Identifier src_id(UInt256 amount, std::int64_t ts, std::uint8_t tag = 1) {
  Identifier id;
  id.side = Side::Source;
  id.own_chain = 1;
  id.counterpart_chain = 56;
  id.destination = "0xaa";
  id.token = "USDC";
  id.amount = amount;
  id.timestamp = ts;
  id.hash.raw().fill(tag);
  return id;
}

Identifier dst_id(UInt256 amount, std::int64_t ts, std::uint8_t tag = 2) {
  Identifier id = src_id(amount, ts, tag);
  id.side = Side::Destination;
  id.own_chain = 56;
  id.counterpart_chain = 1;
  return id;
}

PairingParams rule_params(double fee, std::int64_t tw) {
  PairingParams p;
  p.fee_rate = FeeRate::from_fraction(fee);
  p.timewindow = tw;
  return p;
}

bool matches(const Identifier& s, const Identifier& d, const PairingParams& p) { return match_pair(s, d, p).first; }

}  // namespace

TEST_SUITE("pairer") {
  TEST_CASE("amount rule is inclusive at the fee boundary") {
    auto p = rule_params(0.2, 7200);
    CHECK(matches(src_id(1000, 0), dst_id(800, 0), p));
    CHECK_FALSE(matches(src_id(1000, 0), dst_id(799, 0), p));
    CHECK(matches(src_id(1000, 0), dst_id(1200, 0), p));
    CHECK_FALSE(matches(src_id(1000, 0), dst_id(1201, 0), p));
    CHECK(matches(src_id(1000, 0), dst_id(1000, 0), rule_params(0.0, 1)));
    CHECK_FALSE(matches(src_id(1000, 0), dst_id(999, 0), rule_params(0.0, 1)));
  }

  TEST_CASE("amount rule divides by the source amount") {
    auto p = rule_params(0.2, 7200);
    // |800 - 1000| / 800 = 0.25 but |1000 - 800| / 1000 = 0.2.
    CHECK(matches(src_id(1000, 0), dst_id(800, 0), p));
    CHECK_FALSE(matches(src_id(800, 0), dst_id(1000, 0), p));
    auto [ok, trace] = match_pair(src_id(0, 0), dst_id(0, 0), p);
    CHECK_FALSE(ok);
    CHECK_FALSE(trace[3].pass);
  }

  TEST_CASE("amount rule is exact for 256-bit values") {
    auto p = rule_params(0.2, 7200);
    UInt256 big = ~UInt256(0);
    UInt256 lower = big - big / 5;
    CHECK(matches(src_id(big, 0), dst_id(lower, 0), p));
    CHECK_FALSE(matches(src_id(big, 0), dst_id(lower - 1, 0), p));
  }

  TEST_CASE("time rule is inclusive and symmetric in the gap") {
    auto p = rule_params(0.2, 600);
    CHECK(matches(src_id(1000, 1000), dst_id(1000, 1600), p));
    CHECK_FALSE(matches(src_id(1000, 1000), dst_id(1000, 1601), p));
    CHECK(matches(src_id(1000, 1000), dst_id(1000, 400), p));
    CHECK_FALSE(matches(src_id(1000, 1000), dst_id(1000, 399), p));
  }

  TEST_CASE("role, destination, token and chain rules") {
    auto p = rule_params(0.2, 600);
    auto s = src_id(1000, 0);
    auto d = dst_id(1000, 0);
    CHECK_FALSE(matches(d, s, p));
    auto other = d;
    other.destination = "0xbb";
    CHECK_FALSE(matches(s, other, p));
    other = d;
    other.token = "ETH";
    CHECK_FALSE(matches(s, other, p));
    other = d;
    other.own_chain = 10;
    CHECK_FALSE(matches(s, other, p));
    other = d;
    other.counterpart_chain = 10;
    CHECK_FALSE(matches(s, other, p));
    auto [ok, trace] = match_pair(s, d, p);
    CHECK(ok);
    for (const auto& r : trace) CHECK(r.pass);
  }

  TEST_CASE("earliest satisfying destination wins and is consumed") {
    auto p = rule_params(0.2, 600);
    std::vector<Identifier> srcs = {src_id(1000, 100, 1), src_id(1000, 50, 2)};
    std::vector<Identifier> dsts = {dst_id(1000, 300, 11), dst_id(1000, 200, 12), dst_id(1000, 5000, 13)};
    for (std::size_t i = 0; i < dsts.size(); ++i) dsts[i].index = i;
    auto pairs = pair_all(srcs, dsts, p);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].src_hash == srcs[1].hash);
    CHECK(pairs[0].dst_hash == dsts[1].hash);
    CHECK(pairs[1].dst_hash == dsts[0].hash);

    PairOptions all;
    all.consume = false;
    all.earliest_only = false;
    CHECK(pair_all(srcs, dsts, p, all).size() == 4);
  }

  TEST_CASE("indexed pairing equals the quadratic scan") {
    Rng rng(77);
    for (int round = 0; round < 60; ++round) {
      auto [src, dst] = gen::random_identifiers(rng, rng.uniform(0, 120), rng.uniform(0, 120));
      auto p = rule_params(rng.pick(std::vector<double>{0.0, 0.05, 0.1, 0.2, 0.5}),
                           static_cast<std::int64_t>(rng.pick(std::vector<std::uint64_t>{1, 50, 60, 300, 2000})));
      std::set<std::pair<Hash32, Hash32>> fast;
      for (const auto& pr : pair_all(src, dst, p)) fast.emplace(pr.src_hash, pr.dst_hash);
      REQUIRE(fast == oracle::brute_force_pairs(src, dst, p));
    }
  }

  TEST_CASE("every emitted pair satisfies all rules and destinations are used once") {
    Rng rng(8);
    auto [src, dst] = gen::random_identifiers(rng, 300, 300);
    auto p = rule_params(0.1, 300);
    auto pairs = pair_all(src, dst, p);
    std::set<std::size_t> used;
    for (const auto& pr : pairs) {
      CHECK(match_pair(src[pr.src_index], dst[pr.dst_index], p).first);
      CHECK(used.insert(pr.dst_index).second);
    }
  }

  TEST_CASE("identifier extraction canonicalises values") {
    PairingParams p;
    p.chain_alias = {{102, 56}};
    Address token;
    token.raw().fill(0x70);
    p.token_alias[{1, token}] = "USDC";
    TransactionInstance tx;
    tx.chain = 1;
    tx.timestamp = 1234;
    tx.call.function = "f";
    tx.call.args.add("to", Value(std::string("0x" + std::string(40, 'A'))));
    tx.call.args.add("chain", Value::uint(102));
    tx.call.args.add("token", Value(token));
    tx.call.args.add("amount", Value::uint(99));
    tx.call.args.add("label", Value(std::string("x")));
    Quintuple q;
    q[Role::D] = FieldPath::parse("transaction[f].to");
    q[Role::C] = FieldPath::parse("transaction[f].chain");
    q[Role::T] = FieldPath::parse("transaction[f].token");
    q[Role::A] = FieldPath::parse("transaction[f].amount");
    q[Role::Ts] = FieldPath::parse("tx.timestamp");
    auto id = extract_identifier(tx, 7, q, p);
    REQUIRE(id);
    CHECK(id->destination == "0x" + std::string(40, 'a'));
    CHECK(id->counterpart_chain == 56);
    CHECK(id->token == "USDC");
    CHECK(id->amount == 99);
    CHECK(id->timestamp == 1234);
    CHECK(id->index == 7);

    std::string error;
    auto bad = q;
    bad[Role::A] = FieldPath::parse("transaction[f].label");
    CHECK_FALSE(extract_identifier(tx, 0, bad, p, &error));
    CHECK(error.find("amount") != std::string::npos);
    bad = q;
    bad[Role::C] = FieldPath::parse("transaction[f].amount");
    CHECK_FALSE(extract_identifier(tx, 0, bad, p, &error));
    CHECK(error.find("unknown chain") != std::string::npos);
    bad = q;
    bad[Role::D] = FieldPath::parse("transaction[f].missing");
    CHECK_FALSE(extract_identifier(tx, 0, bad, p, &error));
  }

  TEST_CASE("scores") {
    Hash32 a, b, c;
    a.raw().fill(1);
    b.raw().fill(2);
    c.raw().fill(3);
    std::set<std::pair<Hash32, Hash32>> truth = {{a, b}, {b, c}};
    auto s = score(std::set<std::pair<Hash32, Hash32>>{{a, b}, {a, c}, {c, c}}, truth);
    CHECK(s.correct == 1);
    CHECK(s.precision == doctest::Approx(1.0 / 3));
    CHECK(s.recall == doctest::Approx(0.5));
    CHECK(s.f1 == doctest::Approx(0.4));
    CHECK(score(std::set<std::pair<Hash32, Hash32>>{}, truth).f1 == 0.0);
    CHECK(score(truth, truth).f1 == 1.0);
  }
}
