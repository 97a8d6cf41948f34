#include "xbridge/examiner.hpp"

#include <algorithm>
#include <limits>

#include "xbridge/rng.hpp"

namespace xbridge {

namespace {

std::optional<std::int64_t> as_time(const Value& v) {
  if (v.kind() != ValueKind::UInt) return std::nullopt;
  if (v.as_uint() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) return std::nullopt;
  return static_cast<std::int64_t>(v.as_uint());
}

bool is_transfer(const DecodedLog& log) {
  if (!log.known || log.event != "Transfer") return false;
  const Value* from = log.args.find("from");
  const Value* to = log.args.find("to");
  const Value* value = log.args.find("value");
  return from && to && value && from->kind() == ValueKind::Address && to->kind() == ValueKind::Address &&
         value->kind() == ValueKind::UInt;
}

}  // namespace

std::vector<AssetFlow> analyze_asset_flow(const TransactionInstance& tx, const PairingParams& params) {
  std::vector<AssetFlow> flows;
  if (tx.native_value > 0) {
    flows.push_back({FlowDirection::Outflow, params.canonical_token(tx.chain, Address()), tx.native_value});
  }
  for (const auto& log : tx.logs) {
    if (!is_transfer(log)) continue;
    const auto& amount = log.args.find("value")->as_uint();
    if (amount == 0) continue;
    std::string token = params.canonical_token(tx.chain, log.emitter);
    if (log.args.find("from")->as_address() == tx.sender) flows.push_back({FlowDirection::Outflow, token, amount});
    if (log.args.find("to")->as_address() == tx.sender) flows.push_back({FlowDirection::Inflow, token, amount});
  }
  return flows;
}

std::vector<FieldPair> phase1_filter(const TransactionInstance& tx, std::span<const Candidate> amount,
                                     std::span<const Candidate> token, const PairingParams& params) {
  std::vector<FieldPair> out;
  auto flows = analyze_asset_flow(tx, params);
  if (flows.empty()) return out;
  std::vector<std::optional<std::string>> tokens;
  for (const auto& t : token) {
    auto v = resolve(tx, t.path);
    tokens.push_back(v ? canonical_token_value(params, tx.chain, *v) : std::nullopt);
  }
  for (const auto& a : amount) {
    auto va = resolve(tx, a.path);
    if (!va || va->kind() != ValueKind::UInt) continue;
    for (std::size_t j = 0; j < token.size(); ++j) {
      if (!tokens[j]) continue;
      bool hit = std::any_of(flows.begin(), flows.end(), [&](const AssetFlow& f) {
        return f.amount == va->as_uint() && f.token == *tokens[j];
      });
      if (hit) out.emplace_back(a.path, token[j].path);
    }
  }
  return out;
}

ChainTimeIndex::ChainTimeIndex(std::span<const TransactionInstance> txs) {
  for (std::size_t i = 0; i < txs.size(); ++i) by_chain_[txs[i].chain].emplace_back(txs[i].timestamp, i);
  for (auto& [chain, list] : by_chain_) std::sort(list.begin(), list.end());
}

std::vector<std::size_t> ChainTimeIndex::range(ChainId chain, std::int64_t lo, std::int64_t hi) const {
  std::vector<std::size_t> out;
  auto it = by_chain_.find(chain);
  if (it == by_chain_.end() || lo > hi) return out;
  const auto& list = it->second;
  auto first = std::lower_bound(list.begin(), list.end(), std::make_pair(lo, std::size_t{0}));
  for (auto p = first; p != list.end() && p->first <= hi; ++p) out.push_back(p->second);
  return out;
}

std::optional<std::vector<std::size_t>> find_by_chain_timestamp(const ChainTimeIndex& index, const Value& chain_value,
                                                                std::int64_t ts, std::int64_t timewindow,
                                                                const PairingParams& params, Side perspective,
                                                                bool symmetric) {
  if (chain_value.kind() != ValueKind::UInt) return std::nullopt;
  auto chain = params.canonical_chain(chain_value.as_uint());
  if (!chain) return std::nullopt;
  std::int64_t lo = ts - timewindow;
  std::int64_t hi = ts + timewindow;
  if (!symmetric) {
    if (perspective == Side::Source) {
      lo = ts;
    } else {
      hi = ts;
    }
  }
  return index.range(*chain, lo, hi);
}

Counterpart build_counterpart(std::span<const TransactionInstance> txs, std::span<const Category> categories,
                              std::span<const Inference> inferences) {
  Counterpart cp{txs, ChainTimeIndex(txs), std::vector<std::unordered_set<std::string>>(txs.size())};
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const auto& d = inferences[c].candidates.roles[Role::D];
    for (auto m : categories[c].members) {
      auto& set = cp.d_values[m];
      if (!d.empty()) {
        for (const auto& cand : d) {
          if (auto v = resolve(txs[m], cand.path); v && v->is_scalar()) set.insert(canonical_key(*v));
        }
      } else {
        for_each_leaf(txs[m], [&](const FieldPath&, const Value& v) {
          if (as_canonical_address(v)) set.insert(canonical_key(v));
        });
      }
    }
  }
  return cp;
}

std::vector<FieldTriple> phase2_match(const TransactionInstance& tx, std::span<const Candidate> destination,
                                      std::span<const Candidate> chain, std::span<const Candidate> timestamp,
                                      const Counterpart& counterpart, const PairingParams& params, Side perspective,
                                      bool symmetric, std::vector<std::string>* diagnostics) {
  std::vector<FieldTriple> out;
  std::vector<std::optional<std::string>> d_keys;
  for (const auto& d : destination) {
    auto v = resolve(tx, d.path);
    d_keys.push_back(v && v->is_scalar() ? std::optional<std::string>(canonical_key(*v)) : std::nullopt);
  }
  for (const auto& c : chain) {
    auto vc = resolve(tx, c.path);
    if (!vc) continue;
    for (const auto& t : timestamp) {
      auto vt = resolve(tx, t.path);
      auto ts = vt ? as_time(*vt) : std::nullopt;
      if (!ts) continue;
      auto located = find_by_chain_timestamp(counterpart.index, *vc, *ts, params.timewindow, params, perspective,
                                             symmetric);
      if (!located) {
        if (diagnostics) diagnostics->push_back("chain field " + c.path.render() + " holds no known chain id");
        break;
      }
      if (located->empty()) continue;
      for (std::size_t i = 0; i < destination.size(); ++i) {
        if (!d_keys[i]) continue;
        bool hit = std::any_of(located->begin(), located->end(),
                               [&](std::size_t d) { return counterpart.d_values[d].contains(*d_keys[i]); });
        if (hit) out.emplace_back(destination[i].path, c.path, t.path);
      }
    }
  }
  return out;
}

bool check_consistency(const TxRefs& txs, std::span<const FieldPath> fields) {
  for (const auto* tx : txs) {
    std::optional<std::string> first;
    for (const auto& f : fields) {
      auto v = resolve(*tx, f);
      if (!v) return false;
      auto key = canonical_key(*v);
      if (!first) {
        first = key;
      } else if (*first != key) {
        return false;
      }
    }
  }
  return true;
}

bool is_unique(const TxRefs& txs, const FieldPath& field) {
  std::set<std::string> values;
  for (const auto* tx : txs) {
    if (auto v = resolve(*tx, field)) values.insert(canonical_key(*v));
  }
  return values.size() != 1;
}

std::size_t ExaminationReport::survivors() const {
  return static_cast<std::size_t>(std::count_if(categories.begin(), categories.end(),
                                                [](const CategoryExamination& c) { return c.quintuple.has_value(); }));
}

namespace {

TxRefs validation_sample(const Category& cat, std::span<const TransactionInstance> txs, const ExaminerOptions& opt) {
  TxRefs all;
  for (auto m : cat.members) all.push_back(&txs[m]);
  std::sort(all.begin(), all.end(), [](const auto* a, const auto* b) { return a->tx_hash < b->tx_hash; });
  if (all.size() <= opt.validation_sample) return all;
  Rng rng(seed_from(cat.key, opt.seed));
  for (std::size_t i = 0; i < opt.validation_sample; ++i) std::swap(all[i], all[rng.uniform(i, all.size() - 1)]);
  all.resize(opt.validation_sample);
  return all;
}

using Support = std::map<FieldPath, std::size_t>;

// Phase 3 for one role. Returns the chosen field, or nullopt when uniqueness empties the set.
std::optional<FieldPath> refine(const TxRefs& members, const Support& survivors, std::vector<std::string>& notes,
                                Role role) {
  std::vector<FieldPath> fields;
  for (const auto& [f, n] : survivors) fields.push_back(f);
  if (fields.size() == 1) return fields.front();
  if (check_consistency(members, fields)) return fields.front();

  std::vector<FieldPath> kept;
  for (const auto& f : fields) {
    if (is_unique(members, f)) {
      kept.push_back(f);
    } else {
      notes.push_back("role " + std::string(role_name(role)) + ": dropped constant field " + f.render());
    }
  }
  if (kept.empty()) return std::nullopt;
  if (kept.size() == 1 || check_consistency(members, kept)) return kept.front();

  // Several varying, non-equivalent fields remain: prefer the one validated on most transactions.
  auto best = std::max_element(kept.begin(), kept.end(), [&](const FieldPath& a, const FieldPath& b) {
    auto sa = survivors.at(a);
    auto sb = survivors.at(b);
    if (sa != sb) return sa < sb;
    return a > b;
  });
  notes.push_back("role " + std::string(role_name(role)) + ": " + std::to_string(kept.size()) +
                  " inconsistent fields remain; chose best-supported " + best->render());
  return *best;
}

CategoryExamination examine_category(Side side, const Category& cat, const Inference& inf,
                                     std::span<const TransactionInstance> txs, const Counterpart& counterpart,
                                     const PairingParams& params, const ExaminerOptions& opt) {
  CategoryExamination out;
  out.key = cat.key;
  out.members = cat.members.size();
  const auto& cand = inf.candidates.roles;
  for (auto r : kAllRoles) out.counts.input[r] = cand[r].size();
  if (!inf.inferable) {
    out.rejection = "uninferable";
    return out;
  }
  if (cat.members.size() == 1) out.diagnostics.push_back("singleton category: uniqueness cannot hold for any field");

  RoleMap<Support> support;
  for (const auto* tx : validation_sample(cat, txs, opt)) {
    std::set<FieldPath> seen_a, seen_t, seen_d, seen_c, seen_ts;
    for (const auto& [fa, ft] : phase1_filter(*tx, cand[Role::A], cand[Role::T], params)) {
      if (seen_a.insert(fa).second) ++support[Role::A][fa];
      if (seen_t.insert(ft).second) ++support[Role::T][ft];
    }
    for (const auto& [fd, fc, fts] : phase2_match(*tx, cand[Role::D], cand[Role::C], cand[Role::Ts], counterpart,
                                                  params, side, opt.symmetric, &out.diagnostics)) {
      if (seen_d.insert(fd).second) ++support[Role::D][fd];
      if (seen_c.insert(fc).second) ++support[Role::C][fc];
      if (seen_ts.insert(fts).second) ++support[Role::Ts][fts];
    }
  }
  std::sort(out.diagnostics.begin(), out.diagnostics.end());
  out.diagnostics.erase(std::unique(out.diagnostics.begin(), out.diagnostics.end()), out.diagnostics.end());

  // One coincidental hit admits a field; keep only those near the best-supported one.
  for (auto r : kAllRoles) {
    std::size_t best = 0;
    for (const auto& [f, n] : support[r]) best = std::max(best, n);
    for (auto it = support[r].begin(); it != support[r].end();) {
      if (static_cast<double>(it->second) < opt.min_support * static_cast<double>(best)) {
        out.diagnostics.push_back("role " + std::string(role_name(r)) + ": dropped weakly supported field " +
                                  it->first.render() + " (" + std::to_string(it->second) + " of " +
                                  std::to_string(best) + ")");
        it = support[r].erase(it);
      } else {
        ++it;
      }
    }
  }

  for (auto r : {Role::A, Role::T}) {
    out.counts.phase1[r] = support[r].size();
  }
  for (auto r : {Role::D, Role::C, Role::Ts}) {
    out.counts.phase1[r] = cand[r].size();
    out.counts.phase2[r] = support[r].size();
  }
  out.counts.phase2[Role::A] = out.counts.phase1[Role::A];
  out.counts.phase2[Role::T] = out.counts.phase1[Role::T];

  if (support[Role::A].empty() || support[Role::T].empty()) {
    out.rejection = "phase1-empty";
    return out;
  }
  if (support[Role::D].empty() || support[Role::C].empty() || support[Role::Ts].empty()) {
    out.rejection = "phase2-empty";
    return out;
  }

  TxRefs members;
  for (auto m : cat.members) members.push_back(&txs[m]);
  Quintuple q;
  for (auto r : kAllRoles) {
    auto chosen = refine(members, support[r], out.diagnostics, r);
    if (!chosen) {
      out.rejection = "phase3-empty:" + std::string(role_name(r));
      return out;
    }
    q[r] = *chosen;
    out.counts.phase3[r] = 1;
  }

  for (const auto* tx : members) {
    for (auto r : kAllRoles) {
      if (!resolve(*tx, q[r])) {
        out.rejection = "unresolvable:" + std::string(role_name(r));
        return out;
      }
    }
  }
  out.quintuple = q;
  return out;
}

}  // namespace

ExaminationReport examine(Side side, std::span<const Category> categories, std::span<const Inference> inferences,
                          std::span<const TransactionInstance> txs, const Counterpart& counterpart,
                          const PairingParams& params, const ExaminerOptions& options) {
  ExaminationReport report;
  report.side = side;
  report.categories.resize(categories.size());
  for (std::size_t i = 0; i < categories.size(); ++i) {
    report.categories[i] = examine_category(side, categories[i], inferences[i], txs, counterpart, params, options);
  }
  return report;
}

}  // namespace xbridge
