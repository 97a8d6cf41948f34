#include "xbridge/json_io.hpp"

#include <fstream>
#include <map>

namespace xbridge {

namespace {

using Kinds = std::map<std::string, std::string>;

Json value_to_json(const Value& v, const FieldPath& path, Kinds& kinds) {
  auto note = [&](ValueKind k) { kinds[path.render()] = std::string(kind_name(k)); };
  switch (v.kind()) {
    case ValueKind::UInt:
      note(v.kind());
      return to_decimal(v.as_uint());
    case ValueKind::Int:
      note(v.kind());
      return v.as_int().str();
    case ValueKind::Address:
      note(v.kind());
      return canonical_address(v.as_address());
    case ValueKind::Bool:
      return v.as_bool();
    case ValueKind::Bytes:
      note(v.kind());
      return to_hex(v.as_bytes());
    case ValueKind::Text:
      note(v.kind());
      return v.as_text();
    case ValueKind::List: {
      Json arr = Json::array();
      for (const auto& e : v.as_list()) arr.push_back(value_to_json(e, path, kinds));
      return arr;
    }
    case ValueKind::Record: {
      Json obj = Json::object();
      const auto& r = v.as_record();
      for (std::size_t i = 0; i < r.size(); ++i) obj[r.name_at(i)] = value_to_json(r.value_at(i), path.child(r.name_at(i)), kinds);
      return obj;
    }
  }
  return nullptr;
}

Json record_to_json(const Record& r, const FieldPath& root, Kinds& kinds) {
  Json obj = Json::object();
  for (std::size_t i = 0; i < r.size(); ++i) obj[r.name_at(i)] = value_to_json(r.value_at(i), root.child(r.name_at(i)), kinds);
  return obj;
}

Int256 parse_int256(const std::string& s) {
  bool neg = !s.empty() && s.front() == '-';
  UInt256 mag = parse_uint256(neg ? std::string_view(s).substr(1) : std::string_view(s));
  if (mag > (UInt256(1) << 255) || (!neg && mag == (UInt256(1) << 255))) throw DataError("int256 out of range: " + s);
  return neg ? Int256(-Int256(mag - 1) - 1) : Int256(mag);
}

Value value_from_json(const Json& j, const FieldPath& path, const Json& kinds) {
  if (j.is_object()) {
    Record r;
    for (auto it = j.begin(); it != j.end(); ++it) r.add(it.key(), value_from_json(it.value(), path.child(it.key()), kinds));
    return Value(std::move(r));
  }
  if (j.is_array()) {
    List items;
    for (const auto& e : j) items.push_back(value_from_json(e, path, kinds));
    return Value(std::move(items));
  }
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_number_unsigned()) return Value(UInt256(j.get<std::uint64_t>()));
  if (!j.is_string()) throw DataError("unsupported JSON leaf at " + path.render());
  const auto& s = j.get_ref<const std::string&>();
  auto it = kinds.find(path.render());
  ValueKind kind = it == kinds.end() ? ValueKind::Text : kind_from_name(it->get<std::string>());
  switch (kind) {
    case ValueKind::UInt:
      return Value(parse_uint256(s));
    case ValueKind::Int:
      return Value(parse_int256(s));
    case ValueKind::Address:
      return Value(Address::from_hex(s));
    case ValueKind::Bytes:
      return Value(from_hex(s));
    case ValueKind::Text:
      return Value(s);
    default:
      throw DataError("kind '" + std::string(kind_name(kind)) + "' cannot be a string leaf at " + path.render());
  }
}

Record record_from_json(const Json& j, const FieldPath& root, const Json& kinds) {
  if (!j.is_object()) throw DataError("expected an object at " + root.render());
  Record r;
  for (auto it = j.begin(); it != j.end(); ++it) r.add(it.key(), value_from_json(it.value(), root.child(it.key()), kinds));
  return r;
}

std::int64_t get_int(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw DataError(std::string("expected integer for '") + key + "'");
  return v.get<std::int64_t>();
}

template <typename F>
auto wrap(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DataError(e.what());
  } catch (const ParseError& e) {
    throw DataError(e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

}  // namespace

Json instance_to_json(const TransactionInstance& tx) {
  Kinds kinds;
  Json j;
  j["chain"] = tx.chain;
  j["tx_hash"] = tx.tx_hash.hex();
  j["block_number"] = tx.block_number;
  j["timestamp"] = tx.timestamp;
  j["sender"] = canonical_address(tx.sender);
  j["contract"] = canonical_address(tx.contract);
  j["native_value"] = to_decimal(tx.native_value);
  j["side"] = side_name(tx.side);
  j["call"] = {{"function", tx.call.function},
               {"known", tx.call.known},
               {"args", record_to_json(tx.call.args, FieldPath::transaction(tx.call.function), kinds)}};
  Json logs = Json::array();
  std::map<std::string, std::size_t> seen;
  for (const auto& log : tx.logs) {
    auto root = FieldPath::log(log.event, ++seen[log.event]);
    logs.push_back({{"event", log.event},
                    {"emitter", canonical_address(log.emitter)},
                    {"known", log.known},
                    {"args", record_to_json(log.args, root, kinds)}});
  }
  j["logs"] = logs;
  Json k = Json::object();
  for (const auto& [path, kind] : kinds) k[path] = kind;
  j["kinds"] = k;
  return j;
}

TransactionInstance instance_from_json(const Json& j) {
  return wrap([&] {
    TransactionInstance tx;
    const Json& kinds = j.contains("kinds") ? j.at("kinds") : Json::object();
    tx.chain = j.at("chain").get<ChainId>();
    tx.tx_hash = Hash32::from_hex(j.at("tx_hash").get<std::string>());
    tx.block_number = j.at("block_number").get<std::uint64_t>();
    tx.timestamp = get_int(j, "timestamp");
    tx.sender = Address::from_hex(j.at("sender").get<std::string>());
    tx.contract = Address::from_hex(j.at("contract").get<std::string>());
    tx.native_value = parse_uint256(j.at("native_value").get<std::string>());
    tx.side = side_from_name(j.at("side").get<std::string>());
    const auto& call = j.at("call");
    tx.call.function = call.at("function").get<std::string>();
    tx.call.known = call.value("known", true);
    tx.call.args = record_from_json(call.at("args"), FieldPath::transaction(tx.call.function), kinds);
    std::map<std::string, std::size_t> seen;
    for (const auto& lj : j.at("logs")) {
      DecodedLog log;
      log.event = lj.at("event").get<std::string>();
      log.emitter = Address::from_hex(lj.at("emitter").get<std::string>());
      log.known = lj.value("known", true);
      log.args = record_from_json(lj.at("args"), FieldPath::log(log.event, ++seen[log.event]), kinds);
      tx.logs.push_back(std::move(log));
    }
    validate(tx);
    return tx;
  });
}

Json raw_to_json(const abi::RawTransaction& raw) {
  Json j;
  j["chain"] = raw.chain;
  j["hash"] = raw.hash.hex();
  j["block"] = raw.block_number;
  j["timestamp"] = raw.timestamp;
  j["from"] = canonical_address(raw.from);
  j["to"] = canonical_address(raw.to);
  j["value"] = to_decimal(raw.value);
  j["input"] = to_hex(raw.input);
  Json logs = Json::array();
  for (const auto& log : raw.logs) {
    Json topics = Json::array();
    for (const auto& t : log.topics) topics.push_back(t.hex());
    logs.push_back({{"address", canonical_address(log.address)}, {"topics", topics}, {"data", to_hex(log.data)}});
  }
  j["logs"] = logs;
  j["side"] = side_name(raw.side);
  return j;
}

abi::RawTransaction raw_from_json(const Json& j) {
  return wrap([&] {
    abi::RawTransaction raw;
    raw.chain = j.at("chain").get<ChainId>();
    raw.hash = Hash32::from_hex(j.at("hash").get<std::string>());
    raw.block_number = j.at("block").get<std::uint64_t>();
    raw.timestamp = get_int(j, "timestamp");
    raw.from = Address::from_hex(j.at("from").get<std::string>());
    raw.to = Address::from_hex(j.at("to").get<std::string>());
    raw.value = parse_uint256(j.at("value").get<std::string>());
    raw.input = from_hex(j.at("input").get<std::string>());
    for (const auto& lj : j.at("logs")) {
      abi::RawLog log;
      log.address = Address::from_hex(lj.at("address").get<std::string>());
      for (const auto& t : lj.at("topics")) log.topics.push_back(Hash32::from_hex(t.get<std::string>()));
      log.data = from_hex(lj.at("data").get<std::string>());
      raw.logs.push_back(std::move(log));
    }
    raw.side = side_from_name(j.at("side").get<std::string>());
    return raw;
  });
}

Json params_to_json(const PairingParams& p) {
  Json j;
  j["timewindow"] = p.timewindow;
  j["fee_rate"] = p.fee_rate.fraction();
  Json chains = Json::object();
  for (const auto& [from, to] : p.chain_alias) chains[std::to_string(from)] = to;
  j["chain_alias"] = chains;
  Json tokens = Json::array();
  for (const auto& [key, symbol] : p.token_alias) {
    tokens.push_back({{"chain", key.first}, {"address", canonical_address(key.second)}, {"symbol", symbol}});
  }
  j["token_alias"] = tokens;
  return j;
}

PairingParams params_from_json(const Json& j) {
  PairingParams p;
  if (!j.is_object()) throw std::invalid_argument("pairing params must be an object");
  try {
    if (j.contains("timewindow")) p.timewindow = j.at("timewindow").get<std::int64_t>();
    if (j.contains("fee_rate")) p.fee_rate = FeeRate::from_fraction(j.at("fee_rate").get<double>());
    if (j.contains("chain_alias")) {
      for (auto it = j.at("chain_alias").begin(); it != j.at("chain_alias").end(); ++it) {
        p.chain_alias[std::stoull(it.key())] = it.value().get<ChainId>();
      }
    }
    if (j.contains("token_alias")) {
      for (const auto& t : j.at("token_alias")) {
        auto key = std::make_pair(t.at("chain").get<ChainId>(), Address::from_hex(t.at("address").get<std::string>()));
        if (!p.token_alias.emplace(key, t.at("symbol").get<std::string>()).second) {
          throw std::invalid_argument("token_alias lists " + canonical_address(key.second) + " twice");
        }
      }
    }
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("pairing params: ") + e.what());
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("pairing params: ") + e.what());
  }
  p.validate();
  return p;
}

Json quintuple_to_json(const Quintuple& q) {
  Json j;
  for (auto r : kAllRoles) j[std::string(role_name(r))] = q[r].render();
  return j;
}

Quintuple quintuple_from_json(const Json& j) {
  return wrap([&] {
    Quintuple q;
    for (auto r : kAllRoles) q[r] = FieldPath::parse(j.at(std::string(role_name(r))).get<std::string>());
    return q;
  });
}

Json candidates_to_json(const CandidateQuintuple& c) {
  Json j;
  for (auto r : kAllRoles) {
    Json list = Json::array();
    for (const auto& cand : c.roles[r]) list.push_back({{"field", cand.path.render()}, {"confidence", cand.confidence}});
    j[std::string(role_name(r))] = list;
  }
  return j;
}

CandidateQuintuple candidates_from_json(const Json& j) {
  return wrap([&] {
    CandidateQuintuple c;
    for (auto r : kAllRoles) {
      auto key = std::string(role_name(r));
      if (!j.contains(key)) continue;
      for (const auto& e : j.at(key)) {
        c.roles[r].push_back(Candidate{FieldPath::parse(e.at("field").get<std::string>()), e.at("confidence").get<double>()});
      }
    }
    return c;
  });
}

Json pair_to_json(const Pair& p) {
  static constexpr const char* kRuleNames[] = {"role", "destination", "token", "amount", "chain", "timestamp"};
  Json j;
  j["src_chain"] = p.src_chain;
  j["src_hash"] = p.src_hash.hex();
  j["dst_chain"] = p.dst_chain;
  j["dst_hash"] = p.dst_hash.hex();
  j["values"] = {{"D", p.values.destination},
                 {"C", p.values.counterpart_chain},
                 {"T", p.values.token},
                 {"A_s", to_decimal(p.values.amount_source)},
                 {"A_d", to_decimal(p.values.amount_destination)},
                 {"Ts_s", p.values.timestamp_source},
                 {"Ts_d", p.values.timestamp_destination}};
  Json rules = Json::array();
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    rules.push_back({{"rule", kRuleNames[i]}, {"pass", p.rules[i].pass}, {"detail", p.rules[i].detail}});
  }
  j["rules"] = rules;
  return j;
}

std::vector<Json> read_json_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_json_lines(const std::filesystem::path& path, const std::vector<Json>& docs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& d : docs) out << d.dump() << '\n';
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<TransactionInstance> read_instances(const std::filesystem::path& path) {
  std::vector<TransactionInstance> out;
  std::size_t n = 0;
  for (const auto& doc : read_json_lines(path)) {
    ++n;
    try {
      out.push_back(instance_from_json(doc));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": instance " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_instances(const std::filesystem::path& path, const std::vector<TransactionInstance>& txs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& tx : txs) out << instance_to_json(tx).dump() << '\n';
}

TruthPairs read_truth_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  TruthPairs out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (n == 1 && line.starts_with("src_hash"))) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(path.string() + ":" + std::to_string(n) + ": expected two columns");
    try {
      out.emplace(Hash32::from_hex(line.substr(0, comma)), Hash32::from_hex(line.substr(comma + 1)));
    } catch (const ParseError& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void write_truth_csv(const std::filesystem::path& path, const TruthPairs& pairs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "src_hash,dst_hash\n";
  for (const auto& [s, d] : pairs) out << s.hex() << ',' << d.hex() << '\n';
}

}  // namespace xbridge
