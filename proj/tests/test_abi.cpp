#include <doctest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "xbridge/abi.hpp"
#include "xbridge/keccak.hpp"

using namespace xbridge;
using namespace xbridge::abi;

namespace {

std::string word(std::string_view hex_tail) {
  return std::string(64 - hex_tail.size(), '0') + std::string(hex_tail);
}

std::string padded_right(std::string_view hex) {
  std::string s(hex);
  while (s.size() % 64 != 0) s += '0';
  return s;
}

Param param(std::string name, AbiType type, bool indexed = false) {
  return Param{std::move(name), std::move(type), indexed};
}

AbiError::Kind error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const AbiError& e) {
    return e.kind();
  }
  FAIL("no AbiError thrown");
  return AbiError::Kind::Range;
}

}  // namespace

TEST_SUITE("abi") {
  TEST_CASE("keccak agrees with the reference permutation and known digests") {
    CHECK(keccak256(std::string_view("")).hex() ==
          "0xc5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");
    CHECK(keccak256(std::string_view("abc")).hex() ==
          "0x4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45");
    CHECK(oracle::hex(oracle::Keccak::hash(std::string_view(""))) ==
          "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470");

    Rng rng(3);
    // Lengths straddle the 136-byte rate boundary.
    for (std::size_t len : {0u, 1u, 55u, 135u, 136u, 137u, 271u, 272u, 273u, 1000u}) {
      Bytes msg(len);
      for (auto& b : msg) b = static_cast<std::uint8_t>(rng.next());
      CHECK(keccak256(ByteView(msg)).hex() == "0x" + oracle::hex(oracle::Keccak::hash(msg)));
    }
  }

  TEST_CASE("selectors and topics") {
    auto sel = selector("transfer(address,uint256)");
    CHECK(to_hex(ByteView(sel)) == "0xa9059cbb");
    CHECK(topic0("Transfer(address,address,uint256)").hex() ==
          "0xddf252ad1be2c89b69c2b068fc378daa952ba7f163c4a11628f55a4df523b3ef");

    FunctionDescriptor fn{"bridge",
                          {param("order", AbiType::tuple({{"to", AbiType::address()}, {"amt", AbiType::uint()}})),
                           param("path", AbiType::array(AbiType::address())),
                           param("", AbiType::fixed_bytes(32))}};
    CHECK(canonical_signature(fn) == "bridge((address,uint256),address[],bytes32)");
    CHECK(param_key(fn.inputs[2], 2) == "arg2");
  }

  TEST_CASE("type parsing") {
    CHECK(AbiType::parse("uint8") == AbiType::uint(8));
    CHECK(AbiType::parse("uint") == AbiType::uint(256));
    CHECK(AbiType::parse("address[3][]").canonical() == "address[3][]");
    CHECK(AbiType::parse("address[3][]").element() == AbiType::array(AbiType::address(), 3));
    CHECK(AbiType::parse("bytes32").head_size() == 32);
    CHECK(AbiType::parse("uint256[3]").head_size() == 96);
    CHECK(AbiType::parse("string[2]").is_dynamic());
    CHECK(AbiType::parse("string[2]").head_size() == 32);
    for (const char* bad : {"uint7", "uint264", "bytes33", "bytes0", "fixed128x18", "address[0]", "int[x]", "tuple"}) {
      CHECK(error_kind([&] { AbiType::parse(bad); }) == AbiError::Kind::UnsupportedType);
    }
  }

  TEST_CASE("hand-assembled static call encoding") {
    FunctionDescriptor fn{"baz", {param("x", AbiType::uint(32)), param("y", AbiType::boolean())}};
    Record args;
    args.add("x", Value::uint(69));
    args.add("y", Value(true));
    std::string expected = "0x" + to_hex(ByteView(selector("baz(uint32,bool)")), false) + word("45") + word("1");
    CHECK(to_hex(encode_call(fn, args)) == expected);
    CHECK(to_hex(ByteView(selector("baz(uint32,bool)"))) == "0xcdcd77c0");
  }

  TEST_CASE("hand-assembled dynamic call encoding") {
    FunctionDescriptor fn{"sam", {param("name", AbiType::bytes()), param("flag", AbiType::boolean()),
                                  param("ids", AbiType::array(AbiType::uint()))}};
    Record args;
    args.add("name", Value(Bytes{'d', 'a', 'v', 'e'}));
    args.add("flag", Value(true));
    args.add("ids", Value(List{Value::uint(1), Value::uint(2), Value::uint(3)}));
    std::string expected = "0xa5643bf2" + word("60") + word("1") + word("a0") + word("4") +
                           padded_right("64617665") + word("3") + word("1") + word("2") + word("3");
    auto encoded = encode_call(fn, args);
    CHECK(to_hex(encoded) == expected);
    auto decoded = decode_call(fn, encoded, DecodeMode::Strict);
    CHECK(decoded.record == args);
    CHECK(decoded.warnings.empty());
  }

  TEST_CASE("negative integers sign-extend") {
    FunctionDescriptor fn{"f", {param("d", AbiType::sint(8))}};
    Record args;
    args.add("d", Value(Int256(-1)));
    auto enc = encode_call(fn, args);
    CHECK(to_hex(ByteView(enc).subspan(4)) == "0x" + std::string(64, 'f'));
    CHECK(decode_call(fn, enc, DecodeMode::Strict).record == args);
  }

  TEST_CASE("event encoding splits topics and data") {
    EventDescriptor ev{"Transfer",
                       {param("from", AbiType::address(), true), param("to", AbiType::address(), true),
                        param("value", AbiType::uint())}};
    Address from, to;
    from.raw().fill(0x11);
    to.raw().fill(0x22);
    Record args;
    args.add("from", Value(from));
    args.add("to", Value(to));
    args.add("value", Value::uint(1000));
    auto log = encode_log(ev, args);
    REQUIRE(log.topics.size() == 3);
    CHECK(log.topics[0] == topic0("Transfer(address,address,uint256)"));
    CHECK(log.topics[1].hex() == "0x" + word(std::string(40, '1')));
    CHECK(to_hex(log.data) == "0x" + word("3e8"));
    CHECK(decode_log(ev, log.topics, log.data, DecodeMode::Strict).record == args);
    CHECK(error_kind([&] { decode_log(ev, std::span(log.topics).first(2), log.data); }) == AbiError::Kind::TopicCount);

    EventDescriptor memo{"Memo", {param("text", AbiType::string(), true)}};
    Record m;
    m.add("text", Value(std::string("hi")));
    auto mlog = encode_log(memo, m);
    CHECK(mlog.topics[1] == keccak256(std::string_view("hi")));
    auto back = decode_log(memo, mlog.topics, mlog.data);
    CHECK(back.warnings.size() == 1);
    CHECK(back.record.find("text")->kind() == ValueKind::Bytes);
  }

  TEST_CASE("strict mode rejects irregular padding, lenient mode reports it") {
    FunctionDescriptor fn{"f", {param("a", AbiType::uint(8)), param("who", AbiType::address())}};
    Bytes data = from_hex("0x" + to_hex(ByteView(selector("f(uint8,address)")), false) + word("1ff") +
                          "ff" + std::string(62, '0'));
    CHECK(error_kind([&] { decode_call(fn, data, DecodeMode::Strict); }) == AbiError::Kind::Padding);
    auto lenient = decode_call(fn, data, DecodeMode::Lenient);
    CHECK(lenient.record.find("a")->as_uint() == 0xff);
    CHECK(lenient.warnings.size() == 2);
  }

  TEST_CASE("malformed buffers") {
    FunctionDescriptor fn{"g", {param("b", AbiType::bytes())}};
    auto sel = to_hex(ByteView(selector("g(bytes)")), false);
    CHECK(error_kind([&] { decode_call(fn, from_hex("0x" + sel + word("20"))); }) == AbiError::Kind::Truncated);
    CHECK(error_kind([&] { decode_call(fn, from_hex("0x" + sel + word("400"))); }) ==
          AbiError::Kind::OffsetOutOfBounds);
    CHECK(error_kind([&] { decode_call(fn, from_hex("0x" + sel + word("20") + word("40") + word("1"))); }) ==
          AbiError::Kind::Truncated);
    CHECK(error_kind([&] { decode_call(fn, from_hex("0xdeadbeef" + word("20") + word("0"))); }) ==
          AbiError::Kind::SelectorMismatch);
    CHECK(error_kind([&] { decode_call(fn, from_hex("0x" + sel.substr(0, 4))); }) == AbiError::Kind::SelectorMismatch);

    FunctionDescriptor small{"h", {param("x", AbiType::uint(8))}};
    Record too_big;
    too_big.add("x", Value::uint(256));
    CHECK(error_kind([&] { encode_call(small, too_big); }) == AbiError::Kind::Range);
    Record wrong_kind;
    wrong_kind.add("x", Value(std::string("1")));
    CHECK(error_kind([&] { encode_call(small, wrong_kind); }) == AbiError::Kind::ValueMismatch);
  }

  TEST_CASE("random round trips reproduce the value tree") {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
      FunctionDescriptor fn{"f" + gen::ident(rng), gen::random_params(rng, 5, false)};
      Record args = gen::random_args(fn.inputs, rng);
      auto encoded = encode_call(fn, args);
      auto decoded = decode_call(fn, encoded, DecodeMode::Strict);
      REQUIRE(decoded.record == args);
      CHECK(decoded.warnings.empty());
      CHECK((encoded.size() - 4) % 32 == 0);

      EventDescriptor ev{"E" + gen::ident(rng), gen::random_params(rng, 5, true)};
      Record eargs = gen::random_args(ev.inputs, rng);
      auto log = encode_log(ev, eargs);
      REQUIRE(decode_log(ev, log.topics, log.data, DecodeMode::Strict).record == eargs);
    }
  }

  TEST_CASE("registry json round trip and instance decoding") {
    Rng rng(5);
    std::vector<FunctionDescriptor> fns;
    std::vector<EventDescriptor> evs;
    for (int i = 0; i < 20; ++i) {
      fns.push_back({"fn" + std::to_string(i), gen::random_params(rng, 4, false)});
      evs.push_back({"Ev" + std::to_string(i), gen::random_params(rng, 4, true)});
    }
    Registry reg;
    auto skipped = reg.load_json(to_json_abi(fns, evs));
    CHECK(skipped.empty());
    REQUIRE(reg.functions().size() == fns.size());
    for (std::size_t i = 0; i < fns.size(); ++i) {
      CHECK(canonical_signature(reg.functions()[i]) == canonical_signature(fns[i]));
      CHECK(canonical_signature(reg.events()[i]) == canonical_signature(evs[i]));
    }

    RawTransaction raw;
    raw.chain = 1;
    raw.timestamp = 100;
    Record args = gen::random_args(fns[3].inputs, rng);
    raw.input = encode_call(fns[3], args);
    Record eargs = gen::random_args(evs[4].inputs, rng);
    auto log = encode_log(evs[4], eargs);
    raw.logs.push_back(RawLog{Address(), log.topics, log.data});
    raw.logs.push_back(RawLog{Address(), {keccak256(std::string_view("Nope()"))}, {}});

    auto decoded = decode_instance(raw, reg);
    CHECK(decoded.instance.call.function == "fn3");
    CHECK(decoded.instance.call.args == args);
    REQUIRE(decoded.instance.logs.size() == 2);
    CHECK(decoded.instance.logs[0].args == eargs);
    CHECK(decoded.instance.logs[1].event == kUnknownName);
    CHECK_FALSE(decoded.instance.logs[1].known);
    CHECK(decoded.diagnostics.size() == 1);

    DecodeOptions drop;
    drop.keep_unknown_logs = false;
    CHECK(decode_instance(raw, reg, drop).instance.logs.size() == 1);

    raw.input = from_hex("0x12345678");
    auto unknown = decode_instance(raw, reg);
    CHECK(unknown.instance.call.function == kUnknownName);
    CHECK(unknown.instance.call.args.find("selector")->as_bytes() == from_hex("0x12345678"));
  }

  TEST_CASE("registry skips unsupported entries") {
    nlohmann::json j = nlohmann::json::parse(R"([
      {"type":"function","name":"ok","inputs":[{"name":"a","type":"uint256"}]},
      {"type":"function","name":"bad","inputs":[{"name":"a","type":"fixed128x18"}]},
      {"type":"constructor","inputs":[]},
      {"type":"event","name":"E","anonymous":false,"inputs":[{"name":"t","type":"tuple","indexed":false,
        "components":[{"name":"x","type":"address"}]}]}
    ])");
    Registry reg;
    auto skipped = reg.load_json(j);
    CHECK(skipped.size() == 1);
    CHECK(reg.functions().size() == 1);
    REQUIRE(reg.events().size() == 1);
    CHECK(canonical_signature(reg.events()[0]) == "E((address))");
  }
}
