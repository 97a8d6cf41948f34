#include "xbridge/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "xbridge/categorizer.hpp"
#include "xbridge/json_io.hpp"
#include "xbridge/keccak.hpp"
#include "xbridge/pairer.hpp"
#include "xbridge/rng.hpp"

namespace xbridge::sim {

namespace {

constexpr std::uint64_t kDeadline = 4'102'444'800;  // 2100-01-01

// Where a leaf gets its value from when a transaction is generated.
enum class Slot {
  Receiver,
  CounterChain,
  Token,
  Amount,
  Sender,
  Contract,
  Collector,
  FeeToken,
  FeeAmount,
  Deadline,
  OwnChain,
  RandWord,
  RandUInt,
  RandSmall,
  RandAddress,
  RandBytes,
  RandText,
  RandBool,
  ConstUInt,
};

enum class Shape { Scalar, ScalarList, Tuple, TupleList };

struct FieldSpec {
  std::string name;
  Shape shape = Shape::Scalar;
  abi::AbiType type;
  Slot slot = Slot::RandUInt;
  bool indexed = false;
  std::vector<FieldSpec> components;
};

struct EventSpec {
  std::string name;
  std::vector<FieldSpec> params;
  bool token_emitter = false;
  /// Emitted twice in a row (second occurrence gets a #2 path).
  bool repeated = false;
};

struct CategorySpec {
  Side side = Side::Source;
  std::string function;
  bool native = false;
  bool decoy = false;
  bool internal_ids = false;
  std::vector<FieldSpec> call;
  std::vector<EventSpec> logs;
  abi::FunctionDescriptor fn;
  std::vector<abi::EventDescriptor> events;
  CategoryTruth truth;
};

struct TokenInfo {
  std::string symbol;
  unsigned decimals = 18;
  Address source;
  Address destination;
};

struct Ctx {
  Address receiver;
  Address sender;
  Address contract;
  Address token;
  Address collector;
  Address fee_token;
  UInt256 amount = 0;
  UInt256 fee_amount = 0;
  std::uint64_t counter_chain = 0;
  std::uint64_t own_chain = 0;
};

struct FillerDef {
  const char* name;
  const char* type;
  Slot slot;
};

const std::vector<FillerDef>& filler_pool() {
  static const std::vector<FillerDef> pool = {
      {"nonce", "uint64", Slot::RandUInt},          {"salt", "bytes32", Slot::RandWord},
      {"extraData", "bytes", Slot::RandBytes},      {"affiliate", "address", Slot::RandAddress},
      {"referralCode", "uint32", Slot::RandSmall},  {"slippageBps", "uint16", Slot::RandSmall},
      {"gasLimit", "uint64", Slot::RandUInt},       {"permitV", "uint8", Slot::RandSmall},
      {"permitR", "bytes32", Slot::RandWord},       {"permitS", "bytes32", Slot::RandWord},
      {"routerFlags", "uint8", Slot::RandSmall},    {"quoteHash", "bytes32", Slot::RandWord},
      {"orderKind", "uint8", Slot::RandSmall},      {"version", "uint16", Slot::ConstUInt},
      {"sequence", "uint64", Slot::RandUInt},       {"payloadHash", "bytes32", Slot::RandWord},
      {"hookData", "bytes", Slot::RandBytes},       {"partnerId", "uint32", Slot::RandSmall},
      {"refundMode", "bool", Slot::RandBool},       {"minOut", "uint256", Slot::RandUInt},
      {"memo", "string", Slot::RandText},           {"label", "string", Slot::RandText},
      {"callData", "bytes", Slot::RandBytes},       {"signature", "bytes", Slot::RandBytes},
      {"isPartial", "bool", Slot::RandBool},        {"routeHash", "bytes32", Slot::RandWord},
      {"poolId", "uint32", Slot::RandSmall},        {"hopCount", "uint8", Slot::RandSmall},
      {"priority", "uint8", Slot::RandSmall},       {"weight", "uint16", Slot::RandSmall},
      {"epoch", "uint32", Slot::RandSmall},         {"batchIndex", "uint32", Slot::RandSmall},
      {"sessionKey", "address", Slot::RandAddress}, {"operator", "address", Slot::RandAddress},
      {"referrer", "address", Slot::RandAddress},   {"integrator", "address", Slot::RandAddress},
      {"feeBps", "uint16", Slot::RandSmall},        {"maxSlippage", "uint16", Slot::RandSmall},
      {"executionHint", "bytes32", Slot::RandWord}, {"permitNonce", "uint256", Slot::RandUInt},
      {"exclusiveFiller", "address", Slot::RandAddress}, {"allowedSender", "address", Slot::RandAddress},
      {"protocolFlags", "uint32", Slot::RandSmall}, {"auxWord", "bytes32", Slot::RandWord},
      {"quoteId", "uint64", Slot::RandUInt},        {"strategy", "uint8", Slot::RandSmall},
      {"bonus", "uint64", Slot::RandUInt},          {"tier", "uint8", Slot::RandSmall},
      {"checksum", "bytes4", Slot::RandWord},       {"isExpress", "bool", Slot::RandBool},
  };
  return pool;
}

const std::vector<std::string> kSourceFunctions = {"bridgeOut", "createOrder",  "deposit",    "lockAndSend",
                                                   "swapAndBridge", "initiate", "sendPayload", "openRoute",
                                                   "enterBridge", "outboundSwap"};
const std::vector<std::string> kDestinationFunctions = {"fulfillOrder", "release",   "claim",  "execute",
                                                        "settleOrder",  "relayIn",   "completeBridge",
                                                        "finalize",     "redeem",    "unlock"};
const std::vector<std::string> kSourceEvents = {"OrderCreated", "BridgeInitiated", "Deposited", "TransferOut",
                                                "SendRequested", "Locked", "Outbound", "RouteOpened"};
const std::vector<std::string> kDestinationEvents = {"OrderFulfilled", "Released", "Claimed", "TransferIn",
                                                     "Executed", "Unlocked", "Inbound", "RouteClosed"};
const std::vector<std::string> kEventPrefixes = {"Pool", "Route", "Quote", "Hook", "Nonce", "Vault",
                                                 "Oracle", "Keeper", "Guard", "Batch", "Ledger", "Signal"};
const std::vector<std::string> kEventSuffixes = {"Updated", "Synced", "Checked", "Recorded", "Noted", "Touched"};
const std::vector<std::string> kTupleNames = {"order", "params", "request", "route", "details"};

struct RoleNames {
  std::vector<std::string> receiver, chain, token, amount, own_chain;
};

const RoleNames& role_names(Side side) {
  static const RoleNames src{{"receiver", "recipient", "receiverDst", "beneficiary", "dstReceiver"},
                             {"dstChainId", "takeChainId", "destinationChain", "targetChainId"},
                             {"token", "giveToken", "tokenIn", "inputToken", "asset"},
                             {"amount", "giveAmount", "amountIn", "inputAmount"},
                             {"originChainId", "srcChainId"}};
  static const RoleNames dst{{"receiver", "recipient", "beneficiary", "receiverAddress"},
                             {"srcChainId", "originChain", "sourceChainId", "fromChainId"},
                             {"token", "outputToken", "tokenOut", "asset"},
                             {"amount", "amountOut", "outputAmount", "takeAmount"},
                             {"localChainId", "dstChainId"}};
  return side == Side::Source ? src : dst;
}

FieldSpec scalar(std::string name, const std::string& type, Slot slot, bool indexed = false) {
  FieldSpec f;
  f.name = std::move(name);
  f.type = abi::AbiType::parse(type);
  f.slot = slot;
  f.indexed = indexed;
  return f;
}

std::size_t leaf_count(const FieldSpec& f) {
  if (f.shape == Shape::Scalar || f.shape == Shape::ScalarList) return 1;
  std::size_t n = 0;
  for (const auto& c : f.components) n += leaf_count(c);
  return n;
}

abi::AbiType type_of(const FieldSpec& f) {
  switch (f.shape) {
    case Shape::Scalar:
      return f.type;
    case Shape::ScalarList:
      return abi::AbiType::array(f.type);
    case Shape::Tuple:
    case Shape::TupleList: {
      std::vector<std::pair<std::string, abi::AbiType>> comps;
      for (const auto& c : f.components) comps.emplace_back(c.name, type_of(c));
      auto t = abi::AbiType::tuple(std::move(comps));
      return f.shape == Shape::Tuple ? t : abi::AbiType::array(t);
    }
  }
  return f.type;
}

bool has_name(const std::vector<FieldSpec>& fields, const std::string& name) {
  return std::any_of(fields.begin(), fields.end(), [&](const FieldSpec& f) { return f.name == name; });
}

/// Adds an unused filler scalar to `fields`; returns false when the pool is exhausted.
bool add_filler(std::vector<FieldSpec>& fields, Rng& rng) {
  const auto& pool = filler_pool();
  std::size_t start = rng.uniform(0, pool.size() - 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& def = pool[(start + i) % pool.size()];
    if (has_name(fields, def.name)) continue;
    fields.push_back(scalar(def.name, def.type, def.slot));
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Value generation

UInt256 pow10(unsigned n) {
  UInt256 r = 1;
  for (unsigned i = 0; i < n; ++i) r *= 10;
  return r;
}

Address random_address(Rng& rng) {
  Address a;
  for (auto& b : a.raw()) b = static_cast<std::uint8_t>(rng.next());
  return a;
}

Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.next());
  return out;
}

Value scalar_value(const FieldSpec& f, const Ctx& ctx, Rng& rng) {
  const auto& t = f.type;
  switch (f.slot) {
    case Slot::Receiver:
      return Value(ctx.receiver);
    case Slot::CounterChain:
      return Value::uint(ctx.counter_chain);
    case Slot::Token:
      return Value(ctx.token);
    case Slot::Amount:
      return Value(ctx.amount);
    case Slot::Sender:
      return Value(ctx.sender);
    case Slot::Contract:
      return Value(ctx.contract);
    case Slot::Collector:
      return Value(ctx.collector);
    case Slot::FeeToken:
      return Value(ctx.fee_token);
    case Slot::FeeAmount:
      return Value(ctx.fee_amount);
    case Slot::Deadline:
      return Value::uint(kDeadline);
    case Slot::OwnChain:
      return Value::uint(ctx.own_chain);
    case Slot::ConstUInt:
      return Value::uint(2);
    case Slot::RandAddress:
      return Value(random_address(rng));
    case Slot::RandBool:
      return Value(rng.chance(0.5));
    case Slot::RandText: {
      std::string s = "note-";
      for (int i = 0; i < 6; ++i) s += static_cast<char>('a' + rng.uniform(0, 25));
      return Value(std::move(s));
    }
    case Slot::RandBytes:
      return Value(random_bytes(rng, rng.uniform(1, 40)));
    case Slot::RandWord:
      return Value(random_bytes(rng, t.kind() == abi::AbiType::Kind::FixedBytes ? t.width() : 32));
    case Slot::RandSmall: {
      std::size_t bits = std::min<std::size_t>(t.width(), 16);
      return Value::uint(rng.uniform(0, (std::uint64_t{1} << bits) - 1));
    }
    case Slot::RandUInt: {
      std::size_t bits = std::min<std::size_t>(t.width(), 64);
      std::uint64_t hi = bits == 64 ? UINT64_MAX : (std::uint64_t{1} << bits) - 1;
      return Value::uint(rng.uniform(0, hi));
    }
  }
  return Value();
}

Value make_value(const FieldSpec& f, const Ctx& ctx, Rng& rng);

Record make_record(const std::vector<FieldSpec>& fields, const Ctx& ctx, Rng& rng) {
  Record r;
  for (const auto& f : fields) r.add(f.name, make_value(f, ctx, rng));
  return r;
}

Value make_value(const FieldSpec& f, const Ctx& ctx, Rng& rng) {
  switch (f.shape) {
    case Shape::Scalar:
      return scalar_value(f, ctx, rng);
    case Shape::ScalarList: {
      List items;
      auto n = rng.uniform(1, 3);
      for (std::uint64_t i = 0; i < n; ++i) items.push_back(scalar_value(f, ctx, rng));
      return Value(std::move(items));
    }
    case Shape::Tuple:
      return Value(make_record(f.components, ctx, rng));
    case Shape::TupleList: {
      List items;
      auto n = rng.uniform(1, 3);
      for (std::uint64_t i = 0; i < n; ++i) items.push_back(Value(make_record(f.components, ctx, rng)));
      return Value(std::move(items));
    }
  }
  return Value();
}

// ---------------------------------------------------------------------------
// Schemas

std::vector<abi::Param> params_of(const std::vector<FieldSpec>& fields) {
  std::vector<abi::Param> out;
  for (const auto& f : fields) out.push_back(abi::Param{f.name, type_of(f), f.indexed});
  return out;
}

void collect_truth(const std::vector<FieldSpec>& fields, const FieldPath& root, CategoryTruth& truth) {
  for (const auto& f : fields) {
    FieldPath p = root.child(f.name);
    if (f.shape == Shape::Tuple) {
      collect_truth(f.components, p, truth);
      continue;
    }
    if (f.shape != Shape::Scalar) continue;
    switch (f.slot) {
      case Slot::Receiver:
        truth.roles[Role::D].push_back(p);
        break;
      case Slot::CounterChain:
        truth.roles[Role::C].push_back(p);
        break;
      case Slot::Token:
        truth.roles[Role::T].push_back(p);
        break;
      case Slot::Amount:
        truth.roles[Role::A].push_back(p);
        break;
      default:
        break;
    }
  }
}

class NamePool {
 public:
  NamePool(std::vector<std::string> names, Rng& rng) : names_(std::move(names)) { rng.shuffle(names_); }
  std::string take() {
    std::size_t i = next_++;
    if (i < names_.size()) return names_[i];
    return names_[i % names_.size()] + "V" + std::to_string(i / names_.size() + 1);
  }

 private:
  std::vector<std::string> names_;
  std::size_t next_ = 0;
};

struct Naming {
  NamePool src_fn, dst_fn, src_ev, dst_ev, filler_ev;
};

std::size_t total_leaves(const CategorySpec& c) {
  std::size_t n = 4;  // tx.timestamp, tx.from, tx.to, tx.value
  for (const auto& f : c.call) n += leaf_count(f);
  for (const auto& e : c.logs) {
    std::size_t per = 0;
    for (const auto& p : e.params) per += leaf_count(p);
    n += per * (e.repeated ? 2 : 1);
  }
  return n;
}

std::size_t total_logs(const CategorySpec& c) {
  std::size_t n = 0;
  for (const auto& e : c.logs) n += e.repeated ? 2 : 1;
  return n;
}

CategorySpec build_category(Side side, bool native, bool decoy, bool motivating, const ScenarioConfig& cfg,
                            Naming& naming, Rng& rng) {
  CategorySpec c;
  c.side = side;
  c.native = native;
  c.decoy = decoy;
  c.internal_ids = rng.chance(0.5);
  c.function = side == Side::Source ? naming.src_fn.take() : naming.dst_fn.take();
  const auto& names = role_names(side);

  std::vector<FieldSpec> core;
  core.push_back(scalar(rng.pick(names.receiver), "address", Slot::Receiver));
  core.push_back(scalar(rng.pick(names.token), "address", Slot::Token));
  core.push_back(scalar(rng.pick(names.amount), "uint256", Slot::Amount));
  core.push_back(scalar(rng.pick(names.chain), "uint256", Slot::CounterChain));
  rng.shuffle(core);
  if (decoy) {
    core.push_back(scalar("deadline", "uint256", Slot::Deadline));
    core.push_back(scalar(rng.pick(names.own_chain), "uint256", Slot::OwnChain));
  }

  bool nested = rng.chance(0.5);
  std::size_t tuple_at = 0;
  if (nested) {
    FieldSpec t;
    t.name = rng.pick(kTupleNames);
    t.shape = Shape::Tuple;
    t.components = core;
    c.call.push_back(std::move(t));
    tuple_at = 0;
  } else {
    c.call = core;
  }

  // Logs: the asset movement, a bridge event mirroring some truth fields, decoys, fillers.
  std::vector<EventSpec> logs;
  if (!native) {
    EventSpec tr;
    tr.name = "Transfer";
    tr.token_emitter = true;
    tr.params.push_back(scalar("from", "address", Slot::Sender, true));
    tr.params.push_back(scalar("to", "address", side == Side::Source ? Slot::Contract : Slot::Receiver, true));
    tr.params.push_back(scalar("value", "uint256", Slot::Amount));
    logs.push_back(std::move(tr));
  }
  {
    EventSpec ev;
    ev.name = side == Side::Source ? naming.src_ev.take() : naming.dst_ev.take();
    ev.params.push_back(scalar("orderId", "bytes32", Slot::RandWord, true));
    for (const auto& f : core) {
      if (f.slot == Slot::Deadline || f.slot == Slot::OwnChain) continue;
      if (f.slot == Slot::Receiver || rng.chance(0.5)) {
        auto m = f;
        m.indexed = f.slot == Slot::Receiver && rng.chance(0.5);
        ev.params.push_back(m);
      }
    }
    logs.push_back(std::move(ev));
  }
  if (decoy) {
    EventSpec refund;
    refund.name = "Refund";
    refund.params.push_back(scalar("recipient", "address", Slot::Sender));
    logs.push_back(std::move(refund));
    EventSpec fee;
    fee.name = "FeePaid";
    fee.params.push_back(scalar("receiver", "address", Slot::Collector));
    fee.params.push_back(scalar("token", "address", Slot::FeeToken));
    fee.params.push_back(scalar("amount", "uint256", Slot::FeeAmount));
    logs.push_back(std::move(fee));
  }

  std::size_t log_target = motivating ? 9 : static_cast<std::size_t>(rng.uniform(cfg.logs_min, cfg.logs_max));
  std::size_t have = logs.size();
  while (have < log_target) {
    EventSpec ev;
    ev.name = naming.filler_ev.take();
    add_filler(ev.params, rng);
    ev.repeated = log_target - have >= 2 && rng.chance(0.25);
    have += ev.repeated ? 2 : 1;
    logs.push_back(std::move(ev));
  }
  rng.shuffle(logs);
  c.logs = std::move(logs);

  // Pad with filler fields until the category has exactly the target leaf count.
  std::size_t target = motivating ? 144 : static_cast<std::size_t>(rng.uniform(cfg.fields_min, cfg.fields_max));
  if (!motivating && total_leaves(c) + 3 <= target && rng.chance(0.5)) {
    FieldSpec hops;
    hops.name = "hops";
    hops.shape = Shape::TupleList;
    hops.components = {scalar("pool", "address", Slot::RandAddress), scalar("feeTier", "uint24", Slot::RandSmall)};
    c.call.push_back(std::move(hops));
  }
  if (!motivating && total_leaves(c) + 1 <= target && rng.chance(0.5)) {
    FieldSpec path = scalar("path", "address", Slot::RandAddress);
    path.shape = Shape::ScalarList;
    c.call.push_back(std::move(path));
  }
  std::size_t container = 0;
  std::size_t stalled = 0;
  while (total_leaves(c) < target && stalled < 64) {
    std::size_t n_containers = 1 + (nested ? 1 : 0) + c.logs.size();
    std::size_t k = container++ % n_containers;
    bool ok = false;
    std::size_t step = 1;
    if (k == 0) {
      ok = add_filler(c.call, rng);
    } else if (nested && k == 1) {
      ok = add_filler(c.call[tuple_at].components, rng);
    } else {
      auto& ev = c.logs[k - 1 - (nested ? 1 : 0)];
      if (ev.name == "Transfer" || ev.name == "Refund" || ev.name == "FeePaid") continue;
      step = ev.repeated ? 2 : 1;
      if (total_leaves(c) + step > target) continue;
      ok = add_filler(ev.params, rng);
    }
    stalled = ok ? 0 : stalled + 1;
  }

  c.fn.name = c.function;
  c.fn.inputs = params_of(c.call);
  c.fn.payable = native;
  for (const auto& e : c.logs) c.events.push_back(abi::EventDescriptor{e.name, params_of(e.params), false});

  c.truth.side = side;
  c.truth.function = c.function;
  c.truth.native = native;
  c.truth.decoy = decoy;
  c.truth.log_count = total_logs(c);
  collect_truth(c.call, FieldPath::transaction(c.function), c.truth);
  std::map<std::string, std::size_t> seen;
  for (const auto& e : c.logs) {
    for (int rep = 0; rep < (e.repeated ? 2 : 1); ++rep) {
      collect_truth(e.params, FieldPath::log(e.name, ++seen[e.name]), c.truth);
    }
  }
  if (native) c.truth.roles[Role::A].push_back(FieldPath::meta(std::string(meta_field::value)));
  c.truth.roles[Role::Ts].push_back(FieldPath::meta(std::string(meta_field::timestamp)));
  return c;
}

// ---------------------------------------------------------------------------
// Transactions

struct Emitted {
  abi::RawTransaction raw;
  TransactionInstance tree;
};

Hash32 tx_hash(std::uint64_t seed, Side side, std::uint64_t counter) {
  Bytes buf(17);
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  buf[8] = side == Side::Source ? 0x53 : 0x44;
  for (int i = 0; i < 8; ++i) buf[9 + i] = static_cast<std::uint8_t>(counter >> (8 * i));
  return keccak256(ByteView(buf));
}

Emitted emit(const CategorySpec& c, const Ctx& ctx, ChainId chain, std::int64_t ts, const Hash32& hash,
             const UInt256& native_value, Rng& rng) {
  Emitted out;
  auto& tx = out.tree;
  tx.chain = chain;
  tx.tx_hash = hash;
  tx.block_number = static_cast<std::uint64_t>(ts / (chain == 1 ? 12 : 3));
  tx.timestamp = ts;
  tx.sender = ctx.sender;
  tx.contract = ctx.contract;
  tx.native_value = native_value;
  tx.side = c.side;
  tx.call.function = c.function;
  tx.call.args = make_record(c.call, ctx, rng);

  auto& raw = out.raw;
  raw.chain = chain;
  raw.hash = hash;
  raw.block_number = tx.block_number;
  raw.timestamp = ts;
  raw.from = ctx.sender;
  raw.to = ctx.contract;
  raw.value = native_value;
  raw.side = c.side;
  raw.input = abi::encode_call(c.fn, tx.call.args);

  for (std::size_t i = 0; i < c.logs.size(); ++i) {
    const auto& spec = c.logs[i];
    for (int rep = 0; rep < (spec.repeated ? 2 : 1); ++rep) {
      DecodedLog log;
      log.event = spec.name;
      log.emitter = spec.token_emitter ? ctx.token : ctx.contract;
      log.args = make_record(spec.params, ctx, rng);
      auto enc = abi::encode_log(c.events[i], log.args);
      raw.logs.push_back(abi::RawLog{log.emitter, std::move(enc.topics), std::move(enc.data)});
      tx.logs.push_back(std::move(log));
    }
  }
  return out;
}

UInt256 draw_amount(const TokenInfo& token, Rng& rng) {
  UInt256 unit = pow10(token.decimals);
  UInt256 whole = rng.uniform(10, 100'000);
  UInt256 frac = token.decimals == 0 ? UInt256(0) : UInt256(rng.uniform(0, static_cast<std::uint64_t>(unit - 1)));
  return whole * unit + frac;
}

std::vector<TokenInfo> make_tokens(Rng& rng) {
  std::vector<TokenInfo> tokens = {{"USDC", 6, {}, {}}, {"USDT", 6, {}, {}}, {"DAI", 18, {}, {}}, {"ETH", 18, {}, {}}};
  for (auto& t : tokens) {
    t.source = random_address(rng);
    t.destination = random_address(rng);
  }
  return tokens;
}

template <typename T>
T get_or(const nlohmann::ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

void ScenarioConfig::validate() const {
  auto rate = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  rate(decoy_field_rate, "decoy_field_rate");
  rate(decoy_tx_rate, "decoy_tx_rate");
  rate(native_rate, "native_rate");
  rate(fee_max, "fee_max");
  rate(late_rate, "late_rate");
  if (fields_min < 5) throw std::invalid_argument("fields_min must be at least 5");
  if (fields_max < fields_min) throw std::invalid_argument("fields_max must be >= fields_min");
  if (logs_max < logs_min) throw std::invalid_argument("logs_max must be >= logs_min");
  if (categories_per_side == 0) throw std::invalid_argument("categories_per_side must be positive");
  if (categories_per_side > 10) throw std::invalid_argument("categories_per_side is limited to 10");
  if (delay_min < 0 || delay_max < delay_min) throw std::invalid_argument("need 0 <= delay_min <= delay_max");
  if (late_rate > 0 && late_delay_max <= delay_max) throw std::invalid_argument("late_delay_max must exceed delay_max");
  if (mean_interarrival <= 0) throw std::invalid_argument("mean_interarrival must be positive");
  if (start_time <= 0) throw std::invalid_argument("start_time must be positive");
  if (source_chain == destination_chain) throw std::invalid_argument("source and destination chains must differ");
  std::set<std::uint64_t> ids = {source_chain, destination_chain, source_internal_id, destination_internal_id};
  if (ids.size() != 4) throw std::invalid_argument("chain ids and internal ids must all differ");
}

ScenarioConfig config_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario config must be an object");
  ScenarioConfig c;
  try {
    c.seed = get_or(j, "seed", c.seed);
    c.n_transfers = get_or(j, "n_transfers", c.n_transfers);
    c.source_chain = get_or(j, "source_chain", c.source_chain);
    c.destination_chain = get_or(j, "destination_chain", c.destination_chain);
    c.source_internal_id = get_or(j, "source_internal_id", c.source_internal_id);
    c.destination_internal_id = get_or(j, "destination_internal_id", c.destination_internal_id);
    c.categories_per_side = get_or(j, "categories_per_side", c.categories_per_side);
    c.fields_min = get_or(j, "fields_min", c.fields_min);
    c.fields_max = get_or(j, "fields_max", c.fields_max);
    c.logs_min = get_or(j, "logs_min", c.logs_min);
    c.logs_max = get_or(j, "logs_max", c.logs_max);
    c.decoy_field_rate = get_or(j, "decoy_field_rate", c.decoy_field_rate);
    c.decoy_tx_rate = get_or(j, "decoy_tx_rate", c.decoy_tx_rate);
    c.native_rate = get_or(j, "native_rate", c.native_rate);
    c.fee_max = get_or(j, "fee_max", c.fee_max);
    c.delay_min = get_or(j, "delay_min", c.delay_min);
    c.delay_max = get_or(j, "delay_max", c.delay_max);
    c.late_rate = get_or(j, "late_rate", c.late_rate);
    c.late_delay_max = get_or(j, "late_delay_max", c.late_delay_max);
    c.start_time = get_or(j, "start_time", c.start_time);
    c.mean_interarrival = get_or(j, "mean_interarrival", c.mean_interarrival);
    c.motivating_category = get_or(j, "motivating_category", c.motivating_category);
  } catch (const nlohmann::ordered_json::exception& e) {
    throw std::invalid_argument(std::string("scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json config_to_json(const ScenarioConfig& c) {
  return {{"seed", c.seed},
          {"n_transfers", c.n_transfers},
          {"source_chain", c.source_chain},
          {"destination_chain", c.destination_chain},
          {"source_internal_id", c.source_internal_id},
          {"destination_internal_id", c.destination_internal_id},
          {"categories_per_side", c.categories_per_side},
          {"fields_min", c.fields_min},
          {"fields_max", c.fields_max},
          {"logs_min", c.logs_min},
          {"logs_max", c.logs_max},
          {"decoy_field_rate", c.decoy_field_rate},
          {"decoy_tx_rate", c.decoy_tx_rate},
          {"native_rate", c.native_rate},
          {"fee_max", c.fee_max},
          {"delay_min", c.delay_min},
          {"delay_max", c.delay_max},
          {"late_rate", c.late_rate},
          {"late_delay_max", c.late_delay_max},
          {"start_time", c.start_time},
          {"mean_interarrival", c.mean_interarrival},
          {"motivating_category", c.motivating_category}};
}

std::set<std::pair<Hash32, Hash32>> Truth::pairs() const {
  std::set<std::pair<Hash32, Hash32>> out;
  for (const auto& t : transfers) out.emplace(t.source_hash, t.destination_hash);
  return out;
}

abi::Registry Scenario::registry() const {
  abi::Registry r;
  for (const auto& c : contracts) {
    for (const auto& f : c.functions) r.add(f);
    for (const auto& e : c.events) r.add(e);
  }
  return r;
}

Scenario generate(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario s;
  s.config = cfg;
  Rng rng(cfg.seed);

  Naming naming{NamePool(kSourceFunctions, rng), NamePool(kDestinationFunctions, rng), NamePool(kSourceEvents, rng),
                NamePool(kDestinationEvents, rng), NamePool({}, rng)};
  {
    std::vector<std::string> filler_events;
    for (const auto& p : kEventPrefixes) {
      for (const auto& q : kEventSuffixes) filler_events.push_back(p + q);
    }
    naming.filler_ev = NamePool(filler_events, rng);
  }

  auto tokens = make_tokens(rng);
  const Address src_bridge = random_address(rng);
  const Address dst_bridge = random_address(rng);
  const Address relayer = random_address(rng);
  const Address src_collector = random_address(rng);
  const Address dst_collector = random_address(rng);
  const Address src_fee_token = random_address(rng);
  const Address dst_fee_token = random_address(rng);

  auto& params = s.params;
  params.chain_alias[cfg.source_internal_id] = cfg.source_chain;
  params.chain_alias[cfg.destination_internal_id] = cfg.destination_chain;
  for (const auto& t : tokens) {
    params.token_alias[{cfg.source_chain, t.source}] = t.symbol;
    params.token_alias[{cfg.destination_chain, t.destination}] = t.symbol;
  }
  params.token_alias[{cfg.source_chain, Address()}] = "ETH";

  // Category schemas.
  const std::size_t n_cat = cfg.categories_per_side;
  const auto n_decoy = static_cast<std::size_t>(std::llround(cfg.decoy_field_rate * static_cast<double>(n_cat)));
  const auto n_native = static_cast<std::size_t>(std::llround(cfg.native_rate * static_cast<double>(n_cat)));
  std::vector<CategorySpec> src_cats;
  std::vector<CategorySpec> dst_cats;
  for (std::size_t i = 0; i < n_cat; ++i) {
    bool motivating = cfg.motivating_category && i == 0;
    bool decoy = motivating || i < n_decoy;
    bool native = !motivating && i >= n_cat - std::min(n_native, n_cat - (cfg.motivating_category ? 1 : 0));
    src_cats.push_back(build_category(Side::Source, native, decoy, motivating, cfg, naming, rng));
  }
  for (std::size_t i = 0; i < n_cat; ++i) {
    dst_cats.push_back(build_category(Side::Destination, false, i < n_decoy, false, cfg, naming, rng));
  }

  // Category keys come from a throwaway instance of each schema.
  {
    Rng proto_rng(seed_from("prototype", cfg.seed));
    Ctx ctx;
    auto key_of = [&](CategorySpec& c, ChainId chain) {
      auto e = emit(c, ctx, chain, cfg.start_time, Hash32(), 0, proto_rng);
      auto fields = fields_of(e.tree);
      c.truth.key = category_key(fields);
      c.truth.field_count = fields.size();
    };
    for (auto& c : src_cats) key_of(c, cfg.source_chain);
    for (auto& c : dst_cats) key_of(c, cfg.destination_chain);
  }

  std::vector<std::size_t> erc20_src;
  std::vector<std::size_t> native_src;
  for (std::size_t i = 0; i < n_cat; ++i) (src_cats[i].native ? native_src : erc20_src).push_back(i);

  std::vector<Emitted> src_out;
  std::vector<Emitted> dst_out;
  std::uint64_t src_counter = 0;
  std::uint64_t dst_counter = 0;
  std::int64_t now = cfg.start_time;

  auto src_ctx = [&](const CategorySpec& c, const TokenInfo& token, Address receiver, UInt256 amount) {
    Ctx ctx;
    ctx.receiver = receiver;
    ctx.sender = random_address(rng);
    ctx.contract = src_bridge;
    ctx.token = c.native ? Address() : token.source;
    ctx.collector = src_collector;
    ctx.fee_token = src_fee_token;
    ctx.amount = amount;
    ctx.fee_amount = amount / 1000 + 1;
    ctx.counter_chain = c.internal_ids ? cfg.destination_internal_id : cfg.destination_chain;
    ctx.own_chain = cfg.source_chain;
    return ctx;
  };
  auto dst_ctx = [&](const CategorySpec& c, const TokenInfo& token, Address receiver, UInt256 amount) {
    Ctx ctx;
    ctx.receiver = receiver;
    ctx.sender = relayer;
    ctx.contract = dst_bridge;
    ctx.token = token.destination;
    ctx.collector = dst_collector;
    ctx.fee_token = dst_fee_token;
    ctx.amount = amount;
    ctx.fee_amount = amount / 1000 + 1;
    ctx.counter_chain = c.internal_ids ? cfg.source_internal_id : cfg.source_chain;
    ctx.own_chain = cfg.destination_chain;
    return ctx;
  };

  for (std::size_t i = 0; i < cfg.n_transfers; ++i) {
    now += static_cast<std::int64_t>(rng.uniform(0, 2 * static_cast<std::uint64_t>(cfg.mean_interarrival)));
    std::size_t ci;
    if (erc20_src.empty() || (!native_src.empty() && rng.chance(static_cast<double>(native_src.size()) / n_cat))) {
      ci = native_src[rng.uniform(0, native_src.size() - 1)];
    } else {
      ci = erc20_src[rng.uniform(0, erc20_src.size() - 1)];
    }
    const auto& sc = src_cats[ci];
    const TokenInfo& token = sc.native ? tokens.back() : tokens[rng.uniform(0, tokens.size() - 1)];
    const auto& dc = dst_cats[rng.uniform(0, n_cat - 1)];

    Address receiver = random_address(rng);
    UInt256 a_src = draw_amount(token, rng);
    auto fee_ppb = rng.uniform(0, static_cast<std::uint64_t>(std::llround(cfg.fee_max * 1e9)));
    UInt256 a_dst = a_src - a_src * fee_ppb / FeeRate::kDenominator;
    std::int64_t delay = rng.chance(cfg.late_rate)
                             ? static_cast<std::int64_t>(rng.uniform(cfg.delay_max + 1, cfg.late_delay_max))
                             : static_cast<std::int64_t>(rng.uniform(cfg.delay_min, cfg.delay_max));

    auto sctx = src_ctx(sc, token, receiver, a_src);
    auto shash = tx_hash(cfg.seed, Side::Source, src_counter++);
    src_out.push_back(emit(sc, sctx, cfg.source_chain, now, shash, sc.native ? a_src : UInt256(0), rng));

    auto dctx = dst_ctx(dc, token, receiver, a_dst);
    auto dhash = tx_hash(cfg.seed, Side::Destination, dst_counter++);
    dst_out.push_back(emit(dc, dctx, cfg.destination_chain, now + delay, dhash, 0, rng));

    TransferTruth t;
    t.source_hash = shash;
    t.destination_hash = dhash;
    t.receiver = canonical_address(receiver);
    t.token = token.symbol;
    t.amount_source = a_src;
    t.amount_destination = a_dst;
    t.ts_source = now;
    t.ts_destination = now + delay;
    t.source_chain = cfg.source_chain;
    t.destination_chain = cfg.destination_chain;
    s.truth.transfers.push_back(std::move(t));
  }

  // Unpaired noise on both sides, spread over the same period.
  const auto n_noise = static_cast<std::size_t>(std::llround(cfg.decoy_tx_rate * static_cast<double>(cfg.n_transfers)));
  const std::int64_t end = std::max(now, cfg.start_time) + cfg.delay_max;
  for (std::size_t i = 0; i < n_noise; ++i) {
    const auto& sc = src_cats[rng.uniform(0, n_cat - 1)];
    const TokenInfo& token = sc.native ? tokens.back() : tokens[rng.uniform(0, tokens.size() - 1)];
    auto amount = draw_amount(token, rng);
    auto ts = static_cast<std::int64_t>(rng.uniform(cfg.start_time, end));
    auto ctx = src_ctx(sc, token, random_address(rng), amount);
    src_out.push_back(emit(sc, ctx, cfg.source_chain, ts, tx_hash(cfg.seed, Side::Source, src_counter++),
                           sc.native ? amount : UInt256(0), rng));
  }
  for (std::size_t i = 0; i < n_noise; ++i) {
    const auto& dc = dst_cats[rng.uniform(0, n_cat - 1)];
    const TokenInfo& token = tokens[rng.uniform(0, tokens.size() - 1)];
    auto amount = draw_amount(token, rng);
    auto ts = static_cast<std::int64_t>(rng.uniform(cfg.start_time, end));
    auto ctx = dst_ctx(dc, token, random_address(rng), amount);
    dst_out.push_back(
        emit(dc, ctx, cfg.destination_chain, ts, tx_hash(cfg.seed, Side::Destination, dst_counter++), 0, rng));
  }

  auto by_time = [](const Emitted& a, const Emitted& b) {
    return std::tie(a.raw.timestamp, a.raw.hash) < std::tie(b.raw.timestamp, b.raw.hash);
  };
  std::sort(src_out.begin(), src_out.end(), by_time);
  std::sort(dst_out.begin(), dst_out.end(), by_time);
  for (auto& e : src_out) {
    s.source_raw.push_back(std::move(e.raw));
    s.source.push_back(std::move(e.tree));
  }
  for (auto& e : dst_out) {
    s.destination_raw.push_back(std::move(e.raw));
    s.destination.push_back(std::move(e.tree));
  }

  for (const auto& c : src_cats) s.truth.categories.push_back(c.truth);
  for (const auto& c : dst_cats) s.truth.categories.push_back(c.truth);

  Contract src_contract{"source_bridge", src_bridge, {}, {}};
  Contract dst_contract{"destination_bridge", dst_bridge, {}, {}};
  Contract erc20{"erc20", Address(), {}, {}};
  auto add_events = [&](Contract& target, const CategorySpec& c) {
    target.functions.push_back(c.fn);
    for (const auto& e : c.events) {
      Contract& owner = e.name == "Transfer" ? erc20 : target;
      bool dup = std::any_of(owner.events.begin(), owner.events.end(), [&](const abi::EventDescriptor& x) {
        return x.name == e.name && x.inputs == e.inputs;
      });
      if (!dup) owner.events.push_back(e);
    }
  };
  for (const auto& c : src_cats) add_events(src_contract, c);
  for (const auto& c : dst_cats) add_events(dst_contract, c);
  s.contracts = {src_contract, dst_contract, erc20};
  return s;
}

std::set<std::pair<Hash32, Hash32>> replay_truth(const Truth& truth, const PairingParams& params) {
  std::set<std::pair<Hash32, Hash32>> out;
  for (const auto& t : truth.transfers) {
    Identifier src{t.receiver, t.destination_chain, t.token, t.amount_source, t.ts_source,
                   Side::Source, t.source_chain, 0, t.source_hash};
    Identifier dst{t.receiver, t.source_chain, t.token, t.amount_destination, t.ts_destination,
                   Side::Destination, t.destination_chain, 0, t.destination_hash};
    if (match_pair(src, dst, params).first) out.emplace(t.source_hash, t.destination_hash);
  }
  return out;
}

nlohmann::ordered_json truth_to_json(const Truth& truth) {
  nlohmann::ordered_json cats = nlohmann::ordered_json::array();
  for (const auto& c : truth.categories) {
    nlohmann::ordered_json roles;
    for (auto r : kAllRoles) {
      auto list = nlohmann::ordered_json::array();
      for (const auto& p : c.roles[r]) list.push_back(p.render());
      roles[std::string(role_name(r))] = list;
    }
    cats.push_back({{"side", side_name(c.side)},
                    {"function", c.function},
                    {"key", c.key},
                    {"native", c.native},
                    {"decoy", c.decoy},
                    {"field_count", c.field_count},
                    {"log_count", c.log_count},
                    {"roles", roles}});
  }
  return {{"categories", cats}};
}

nlohmann::ordered_json transfer_to_json(const TransferTruth& t) {
  return {{"src_hash", t.source_hash.hex()},
          {"dst_hash", t.destination_hash.hex()},
          {"receiver", t.receiver},
          {"token", t.token},
          {"amount_src", to_decimal(t.amount_source)},
          {"amount_dst", to_decimal(t.amount_destination)},
          {"ts_src", t.ts_source},
          {"ts_dst", t.ts_destination},
          {"src_chain", t.source_chain},
          {"dst_chain", t.destination_chain}};
}

TransferTruth transfer_from_json(const nlohmann::ordered_json& j) {
  try {
    TransferTruth t;
    t.source_hash = Hash32::from_hex(j.at("src_hash").get<std::string>());
    t.destination_hash = Hash32::from_hex(j.at("dst_hash").get<std::string>());
    t.receiver = j.at("receiver").get<std::string>();
    t.token = j.at("token").get<std::string>();
    t.amount_source = parse_uint256(j.at("amount_src").get<std::string>());
    t.amount_destination = parse_uint256(j.at("amount_dst").get<std::string>());
    t.ts_source = j.at("ts_src").get<std::int64_t>();
    t.ts_destination = j.at("ts_dst").get<std::int64_t>();
    t.source_chain = j.at("src_chain").get<ChainId>();
    t.destination_chain = j.at("dst_chain").get<ChainId>();
    return t;
  } catch (const nlohmann::ordered_json::exception& e) {
    throw std::invalid_argument(std::string("truth transfer: ") + e.what());
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("truth transfer: ") + e.what());
  }
}

void write_scenario(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "abi");
  for (const auto& c : s.contracts) {
    write_json_file(dir / "abi" / (c.name + ".json"), Json(to_json_abi(c.functions, c.events)));
  }
  std::vector<Json> src;
  std::vector<Json> dst;
  for (const auto& r : s.source_raw) src.push_back(raw_to_json(r));
  for (const auto& r : s.destination_raw) dst.push_back(raw_to_json(r));
  write_json_lines(dir / "raw_source.jsonl", src);
  write_json_lines(dir / "raw_destination.jsonl", dst);
  write_instances(dir / "source.jsonl", s.source);
  write_instances(dir / "destination.jsonl", s.destination);
  write_truth_csv(dir / "truth_pairs.csv", s.truth.pairs());
  write_json_file(dir / "truth_quintuples.json", truth_to_json(s.truth));
  std::vector<Json> transfers;
  for (const auto& t : s.truth.transfers) transfers.push_back(transfer_to_json(t));
  write_json_lines(dir / "truth_transfers.jsonl", transfers);
  write_json_file(dir / "pairing_params.json", params_to_json(s.params));
  write_json_file(dir / "scenario.json", config_to_json(s.config));
}

}  // namespace xbridge::sim
