#include "xbridge/pairer.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <tuple>

namespace xbridge {

namespace {

void set_error(std::string* error, std::string what) {
  if (error) *error = std::move(what);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

}  // namespace

std::optional<Identifier> extract_identifier(const TransactionInstance& tx, std::size_t index, const Quintuple& qt,
                                             const PairingParams& params, std::string* error) {
  RoleMap<Value> v;
  for (auto r : kAllRoles) {
    auto found = resolve(tx, qt[r]);
    if (!found) {
      set_error(error, "missing " + std::string(role_name(r)) + " field " + qt[r].render());
      return std::nullopt;
    }
    v[r] = std::move(*found);
  }
  Identifier id;
  id.side = tx.side;
  id.own_chain = tx.chain;
  id.index = index;
  id.hash = tx.tx_hash;

  if (auto addr = as_canonical_address(v[Role::D])) {
    id.destination = *addr;
  } else if (v[Role::D].is_scalar()) {
    id.destination = canonical_key(v[Role::D]);
  } else {
    set_error(error, "destination is not a scalar");
    return std::nullopt;
  }

  if (v[Role::C].kind() != ValueKind::UInt) {
    set_error(error, "chain value is not an unsigned integer");
    return std::nullopt;
  }
  auto chain = params.canonical_chain(v[Role::C].as_uint());
  if (!chain) {
    set_error(error, "unknown chain id " + to_display(v[Role::C]));
    return std::nullopt;
  }
  id.counterpart_chain = *chain;

  auto token = canonical_token_value(params, tx.chain, v[Role::T]);
  if (!token) {
    set_error(error, "token value is neither address nor text");
    return std::nullopt;
  }
  id.token = *token;

  if (v[Role::A].kind() != ValueKind::UInt) {
    set_error(error, "amount is not an unsigned integer");
    return std::nullopt;
  }
  id.amount = v[Role::A].as_uint();

  if (v[Role::Ts].kind() != ValueKind::UInt ||
      v[Role::Ts].as_uint() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    set_error(error, "timestamp is not a representable unsigned integer");
    return std::nullopt;
  }
  id.timestamp = static_cast<std::int64_t>(v[Role::Ts].as_uint());
  return id;
}

std::pair<bool, RuleTrace> match_pair(const Identifier& s, const Identifier& d, const PairingParams& params) {
  RuleTrace t;
  t[0].pass = s.side == Side::Source && d.side == Side::Destination;
  t[0].detail = std::string(side_name(s.side)) + " -> " + std::string(side_name(d.side));

  t[1].pass = s.destination == d.destination;
  t[1].detail = s.destination + (t[1].pass ? " == " : " != ") + d.destination;

  t[2].pass = s.token == d.token;
  t[2].detail = s.token + (t[2].pass ? " == " : " != ") + d.token;

  if (s.amount == 0) {
    t[3].pass = false;
    t[3].detail = "source amount is zero; ratio undefined";
  } else {
    BigInt diff = s.amount > d.amount ? BigInt(s.amount - d.amount) : BigInt(d.amount - s.amount);
    t[3].pass = diff * FeeRate::kDenominator <= BigInt(params.fee_rate.ppb()) * BigInt(s.amount);
    t[3].detail = "|" + to_decimal(s.amount) + " - " + to_decimal(d.amount) + "| / " + to_decimal(s.amount) +
                  (t[3].pass ? " <= " : " > ") + std::to_string(params.fee_rate.fraction());
  }

  t[4].pass = d.own_chain == s.counterpart_chain && s.own_chain == d.counterpart_chain;
  t[4].detail = "chain(dst)=" + std::to_string(d.own_chain) + " dstChain(src)=" + std::to_string(s.counterpart_chain) +
                " chain(src)=" + std::to_string(s.own_chain) + " srcChain(dst)=" + std::to_string(d.counterpart_chain);

  std::int64_t gap = s.timestamp > d.timestamp ? s.timestamp - d.timestamp : d.timestamp - s.timestamp;
  t[5].pass = gap <= params.timewindow;
  t[5].detail = "|" + std::to_string(s.timestamp) + " - " + std::to_string(d.timestamp) + "| = " + std::to_string(gap) +
                (t[5].pass ? " <= " : " > ") + std::to_string(params.timewindow);

  bool all = std::all_of(t.begin(), t.end(), [](const RuleCheck& c) { return c.pass; });
  return {all, t};
}

std::vector<Pair> pair_all(std::span<const Identifier> sources, std::span<const Identifier> destinations,
                           const PairingParams& params, const PairOptions& options) {
  using Key = std::tuple<std::string, std::string, ChainId>;
  const std::int64_t width = params.timewindow;
  std::map<Key, std::map<std::int64_t, std::vector<std::size_t>>> index;
  for (std::size_t i = 0; i < destinations.size(); ++i) {
    const auto& d = destinations[i];
    index[{d.token, d.destination, d.own_chain}][floor_div(d.timestamp, width)].push_back(i);
  }

  std::vector<std::size_t> order(sources.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(sources[a].timestamp, sources[a].hash) < std::tie(sources[b].timestamp, sources[b].hash);
  });

  std::vector<bool> consumed(destinations.size(), false);
  std::vector<Pair> out;
  auto emit = [&](const Identifier& s, const Identifier& d, const RuleTrace& trace) {
    Pair p;
    p.src_index = s.index;
    p.dst_index = d.index;
    p.src_chain = s.own_chain;
    p.dst_chain = d.own_chain;
    p.src_hash = s.hash;
    p.dst_hash = d.hash;
    p.values = {s.destination, s.counterpart_chain, s.token, s.amount, d.amount, s.timestamp, d.timestamp};
    p.rules = trace;
    out.push_back(std::move(p));
  };

  for (auto si : order) {
    const auto& s = sources[si];
    auto it = index.find({s.token, s.destination, s.counterpart_chain});
    if (it == index.end()) continue;
    std::vector<std::size_t> cands;
    std::int64_t b = floor_div(s.timestamp, width);
    for (std::int64_t k = b - 1; k <= b + 1; ++k) {
      if (auto bucket = it->second.find(k); bucket != it->second.end()) {
        cands.insert(cands.end(), bucket->second.begin(), bucket->second.end());
      }
    }
    std::sort(cands.begin(), cands.end(), [&](std::size_t x, std::size_t y) {
      return std::tie(destinations[x].timestamp, destinations[x].hash) <
             std::tie(destinations[y].timestamp, destinations[y].hash);
    });
    for (auto di : cands) {
      if (options.consume && consumed[di]) continue;
      auto [ok, trace] = match_pair(s, destinations[di], params);
      if (!ok) continue;
      emit(s, destinations[di], trace);
      if (options.consume) consumed[di] = true;
      if (options.earliest_only) break;
    }
  }
  return out;
}

Scores score(const std::set<std::pair<Hash32, Hash32>>& predicted, const std::set<std::pair<Hash32, Hash32>>& truth) {
  Scores s;
  s.predicted = predicted.size();
  s.truth = truth.size();
  for (const auto& p : predicted) s.correct += truth.contains(p) ? 1 : 0;
  s.precision = s.predicted ? static_cast<double>(s.correct) / s.predicted : 0.0;
  s.recall = s.truth ? static_cast<double>(s.correct) / s.truth : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

Scores score(std::span<const Pair> pairs, const std::set<std::pair<Hash32, Hash32>>& truth) {
  std::set<std::pair<Hash32, Hash32>> predicted;
  for (const auto& p : pairs) predicted.emplace(p.src_hash, p.dst_hash);
  return score(predicted, truth);
}

}  // namespace xbridge
