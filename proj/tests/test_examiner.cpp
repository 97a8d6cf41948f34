#include <doctest.h>

#include "xbridge/categorizer.hpp"
#include "xbridge/examiner.hpp"
#include "xbridge/harness.hpp"
#include "xbridge/simulator.hpp"

using namespace xbridge;

namespace {

Address addr(std::uint8_t fill) {
  Address a;
  a.raw().fill(fill);
  return a;
}

const Address kSender = addr(0x51);
const Address kBridge = addr(0xb1);
const Address kToken = addr(0x70);
const Address kReceiver = addr(0x4e);

DecodedLog transfer(const Address& token, const Address& from, const Address& to, std::uint64_t value) {
  Record r;
  r.add("from", Value(from));
  r.add("to", Value(to));
  r.add("value", Value::uint(value));
  return DecodedLog{"Transfer", token, r, true};
}

TransactionInstance source_tx(std::int64_t ts, std::uint64_t amount, std::uint8_t hash) {
  TransactionInstance tx;
  tx.chain = 1;
  tx.side = Side::Source;
  tx.tx_hash.raw().fill(hash);
  tx.timestamp = ts;
  tx.sender = kSender;
  tx.contract = kBridge;
  tx.call.function = "bridgeOut";
  tx.call.args.add("receiver", Value(kReceiver));
  tx.call.args.add("refund", Value(kSender));
  tx.call.args.add("dstChainId", Value::uint(56));
  tx.call.args.add("token", Value(kToken));
  tx.call.args.add("amount", Value::uint(amount));
  tx.call.args.add("minOut", Value::uint(amount / 2));
  tx.logs.push_back(transfer(kToken, kSender, kBridge, amount));
  return tx;
}

TransactionInstance destination_tx(std::int64_t ts, std::uint64_t amount, std::uint8_t hash) {
  TransactionInstance tx;
  tx.chain = 56;
  tx.side = Side::Destination;
  tx.tx_hash.raw().fill(hash);
  tx.timestamp = ts;
  tx.sender = addr(0xee);
  tx.contract = addr(0xb2);
  tx.call.function = "relay";
  tx.call.args.add("to", Value(kReceiver));
  tx.call.args.add("srcChain", Value::uint(1));
  tx.call.args.add("amount", Value::uint(amount));
  return tx;
}

std::vector<Candidate> cands(std::initializer_list<const char*> paths) {
  std::vector<Candidate> out;
  for (const char* p : paths) out.push_back(Candidate{FieldPath::parse(p), 1.0});
  return out;
}

PairingParams params() {
  PairingParams p;
  p.timewindow = 600;
  p.chain_alias = {{101, 1}, {156, 56}};
  p.token_alias[{1, kToken}] = "TKN";
  return p;
}

}  // namespace

TEST_SUITE("examiner") {
  TEST_CASE("asset flows are relative to the sender") {
    auto tx = source_tx(100, 1000, 1);
    tx.native_value = 5;
    tx.logs.push_back(transfer(kToken, kBridge, kSender, 3));
    tx.logs.push_back(transfer(kToken, kBridge, kReceiver, 7));
    tx.logs.push_back(transfer(kToken, kSender, kBridge, 0));
    auto flows = analyze_asset_flow(tx, params());
    REQUIRE(flows.size() == 3);
    CHECK(flows[0] == AssetFlow{FlowDirection::Outflow, "1:native", 5});
    CHECK(flows[1] == AssetFlow{FlowDirection::Outflow, "TKN", 1000});
    CHECK(flows[2] == AssetFlow{FlowDirection::Inflow, "TKN", 3});
  }

  TEST_CASE("phase one keeps amount/token pairs that match a flow") {
    auto tx = source_tx(100, 1000, 1);
    auto amount = cands({"transaction[bridgeOut].amount", "transaction[bridgeOut].minOut", "tx.timestamp"});
    auto token = cands({"transaction[bridgeOut].token", "transaction[bridgeOut].receiver"});
    auto pairs = phase1_filter(tx, amount, token, params());
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].first.render() == "transaction[bridgeOut].amount");
    CHECK(pairs[0].second.render() == "transaction[bridgeOut].token");

    tx.logs.clear();
    CHECK(phase1_filter(tx, amount, token, params()).empty());
  }

  TEST_CASE("time index ranges are inclusive and direction-aware") {
    std::vector<TransactionInstance> dst = {destination_tx(100, 1, 1), destination_tx(700, 1, 2),
                                            destination_tx(701, 1, 3), destination_tx(40, 1, 4)};
    ChainTimeIndex index(dst);
    CHECK(index.range(56, 100, 700) == std::vector<std::size_t>{0, 1});
    CHECK(index.range(56, 0, 1000) == std::vector<std::size_t>{3, 0, 1, 2});
    CHECK(index.range(1, 0, 1000).empty());
    CHECK(index.range(56, 700, 100).empty());

    auto p = params();
    auto fwd = find_by_chain_timestamp(index, Value::uint(56), 100, 600, p, Side::Source, false);
    CHECK(*fwd == std::vector<std::size_t>{0, 1});
    auto back = find_by_chain_timestamp(index, Value::uint(56), 701, 600, p, Side::Destination, false);
    CHECK(*back == std::vector<std::size_t>{1, 2});
    auto both = find_by_chain_timestamp(index, Value::uint(56), 100, 60, p, Side::Source, true);
    CHECK(*both == std::vector<std::size_t>{3, 0});
    CHECK_FALSE(find_by_chain_timestamp(index, Value::uint(99), 100, 600, p, Side::Source, false));
    CHECK_FALSE(find_by_chain_timestamp(index, Value(std::string("56")), 100, 600, p, Side::Source, false));
  }

  TEST_CASE("phase two needs the destination value on a counterpart in the window") {
    std::vector<TransactionInstance> dst = {destination_tx(1000, 990, 9)};
    auto dcats = categorize(dst);
    std::vector<Inference> dinf(dcats.size());
    dinf[0].inferable = true;
    dinf[0].candidates.roles[Role::D] = cands({"transaction[relay].to"});
    auto cp = build_counterpart(dst, dcats, dinf);
    CHECK(cp.d_values[0].contains(canonical_key(Value(kReceiver))));

    auto tx = source_tx(500, 1000, 1);
    auto dcand = cands({"transaction[bridgeOut].receiver", "transaction[bridgeOut].refund"});
    auto ccand = cands({"transaction[bridgeOut].dstChainId", "transaction[bridgeOut].amount"});
    auto tcand = cands({"tx.timestamp"});
    std::vector<std::string> notes;
    auto triples = phase2_match(tx, dcand, ccand, tcand, cp, params(), Side::Source, false, &notes);
    REQUIRE(triples.size() == 1);
    CHECK(std::get<0>(triples[0]).render() == "transaction[bridgeOut].receiver");
    CHECK(std::get<1>(triples[0]).render() == "transaction[bridgeOut].dstChainId");
    CHECK(notes.size() == 1);

    auto late = source_tx(399, 1000, 2);
    CHECK(phase2_match(late, dcand, ccand, tcand, cp, params(), Side::Source, false).empty());
    CHECK(phase2_match(late, dcand, ccand, tcand, cp, params(), Side::Source, true).empty());
    auto edge = source_tx(400, 1000, 3);
    CHECK(phase2_match(edge, dcand, ccand, tcand, cp, params(), Side::Source, false).size() == 1);
  }

  TEST_CASE("consistency and uniqueness") {
    auto a = source_tx(100, 1000, 1);
    auto b = source_tx(200, 2000, 2);
    TxRefs both = {&a, &b};
    auto amount = FieldPath::parse("transaction[bridgeOut].amount");
    auto log_value = FieldPath::parse("log[Transfer].value");
    auto chain = FieldPath::parse("transaction[bridgeOut].dstChainId");
    std::vector<FieldPath> same = {amount, log_value};
    std::vector<FieldPath> differ = {amount, chain};
    CHECK(check_consistency(both, same));
    CHECK_FALSE(check_consistency(both, differ));
    std::vector<FieldPath> missing = {amount, FieldPath::parse("transaction[bridgeOut].nope")};
    CHECK_FALSE(check_consistency(both, missing));
    CHECK(is_unique(both, amount));
    CHECK_FALSE(is_unique(both, chain));
    TxRefs single = {&a};
    CHECK_FALSE(is_unique(single, amount));
  }

  TEST_CASE("examination picks the planted quintuple on a hand-built pair of datasets") {
    std::vector<TransactionInstance> src;
    std::vector<TransactionInstance> dst;
    for (std::uint8_t i = 0; i < 20; ++i) {
      src.push_back(source_tx(1000 + 100 * i, 1000 + 10 * i, i + 1));
      dst.push_back(destination_tx(1000 + 100 * i + 50, 990 + 10 * i, 100 + i));
    }
    auto scats = categorize(src);
    auto dcats = categorize(dst);
    std::vector<Inference> sinf(1), dinf(1);
    sinf[0].inferable = true;
    sinf[0].candidates.roles[Role::D] = cands({"transaction[bridgeOut].receiver", "transaction[bridgeOut].refund"});
    sinf[0].candidates.roles[Role::C] = cands({"transaction[bridgeOut].dstChainId"});
    sinf[0].candidates.roles[Role::T] = cands({"transaction[bridgeOut].token", "log[Transfer].from"});
    sinf[0].candidates.roles[Role::A] =
        cands({"log[Transfer].value", "transaction[bridgeOut].amount", "transaction[bridgeOut].minOut"});
    sinf[0].candidates.roles[Role::Ts] = cands({"tx.timestamp"});
    dinf[0].inferable = true;
    dinf[0].candidates.roles[Role::D] = cands({"transaction[relay].to"});
    auto cp = build_counterpart(dst, dcats, dinf);
    auto report = examine(Side::Source, scats, sinf, src, cp, params(), ExaminerOptions{});
    REQUIRE(report.survivors() == 1);
    const auto& q = *report.categories[0].quintuple;
    CHECK(q[Role::D].render() == "transaction[bridgeOut].receiver");
    CHECK(q[Role::T].render() == "transaction[bridgeOut].token");
    // amount and the Transfer value agree everywhere; the smaller path wins.
    CHECK(q[Role::A].render() == "log[Transfer].value");
    CHECK(report.categories[0].counts.phase1[Role::A] == 2);

    sinf[0].candidates.roles[Role::D] = cands({"transaction[bridgeOut].refund"});
    auto rejected = examine(Side::Source, scats, sinf, src, cp, params(), ExaminerOptions{});
    CHECK(rejected.survivors() == 0);
    CHECK(rejected.categories[0].rejection == "phase2-empty");
  }

  TEST_CASE("weakly supported chain fields are dropped before uniqueness") {
    std::vector<TransactionInstance> src;
    std::vector<TransactionInstance> dst;
    for (std::uint8_t i = 0; i < 20; ++i) {
      auto tx = source_tx(1000 + 100 * i, 1000 + 10 * i, i + 1);
      // Two members carry a filler that happens to equal the destination chain id.
      tx.call.args.add("partnerId", Value::uint(i < 2 ? 56 : 7000 + i));
      src.push_back(tx);
      dst.push_back(destination_tx(1000 + 100 * i + 50, 990 + 10 * i, 100 + i));
    }
    auto scats = categorize(src);
    auto dcats = categorize(dst);
    std::vector<Inference> sinf(1), dinf(1);
    sinf[0].inferable = true;
    sinf[0].candidates.roles[Role::D] = cands({"transaction[bridgeOut].receiver"});
    sinf[0].candidates.roles[Role::C] = cands({"transaction[bridgeOut].dstChainId", "transaction[bridgeOut].partnerId"});
    sinf[0].candidates.roles[Role::T] = cands({"transaction[bridgeOut].token"});
    sinf[0].candidates.roles[Role::A] = cands({"transaction[bridgeOut].amount"});
    sinf[0].candidates.roles[Role::Ts] = cands({"tx.timestamp"});
    dinf[0].inferable = true;
    dinf[0].candidates.roles[Role::D] = cands({"transaction[relay].to"});
    auto cp = build_counterpart(dst, dcats, dinf);

    ExaminerOptions keep_all;
    keep_all.min_support = 0.0;
    auto loose = examine(Side::Source, scats, sinf, src, cp, params(), keep_all);
    CHECK(loose.categories[0].counts.phase2[Role::C] == 2);
    CHECK_FALSE((loose.categories[0].quintuple &&
                 (*loose.categories[0].quintuple)[Role::C].render() == "transaction[bridgeOut].dstChainId"));

    auto report = examine(Side::Source, scats, sinf, src, cp, params(), ExaminerOptions{});
    CHECK(report.categories[0].counts.phase2[Role::C] == 1);
    REQUIRE(report.survivors() == 1);
    CHECK((*report.categories[0].quintuple)[Role::C].render() == "transaction[bridgeOut].dstChainId");
  }

  TEST_CASE("examiner recovers truth roles on a simulated decoy scenario") {
    sim::ScenarioConfig cfg;
    cfg.seed = 4;
    cfg.n_transfers = 400;
    cfg.decoy_field_rate = 0.5;
    cfg.decoy_tx_rate = 0.2;
    auto s = sim::generate(cfg);
    Dataset data{s.source, s.destination};
    PipelineOptions opt;
    opt.params = s.params;
    LexicalProvider provider(RoleLexicon::load(XBRIDGE_DATA_DIR "/lexicon.json"), opt.inference.top_k);
    auto run = run_pipeline(data, provider, opt);

    std::size_t checked = 0;
    for (const auto* side : {&run.source, &run.destination}) {
      for (std::size_t c = 0; c < side->categories.size(); ++c) {
        auto truth = std::find_if(s.truth.categories.begin(), s.truth.categories.end(),
                                  [&](const sim::CategoryTruth& t) { return t.key == side->categories[c].key; });
        if (truth == s.truth.categories.end()) continue;
        REQUIRE(side->quintuples[c].has_value());
        for (auto r : kAllRoles) {
          const auto& ok = truth->roles[r];
          CHECK_MESSAGE(std::find(ok.begin(), ok.end(), (*side->quintuples[c])[r]) != ok.end(),
                        truth->function << " " << role_name(r) << " chose " << (*side->quintuples[c])[r].render());
        }
        ++checked;
      }
    }
    CHECK(checked == 2 * cfg.categories_per_side);
  }
}
