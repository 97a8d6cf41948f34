#include "xbridge/harness.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <sstream>
#include <tuple>

#include "xbridge/categorizer.hpp"

namespace xbridge {

std::vector<TransactionInstance> decode_all(std::span<const abi::RawTransaction> raw, const abi::Registry& registry,
                                            std::vector<std::string>* diagnostics) {
  std::vector<TransactionInstance> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    auto decoded = abi::decode_instance(r, registry);
    if (diagnostics) {
      for (auto& d : decoded.diagnostics) diagnostics->push_back(r.hash.hex() + ": " + d);
    }
    out.push_back(std::move(decoded.instance));
  }
  return out;
}

std::vector<Identifier> extract_identifiers(std::span<const TransactionInstance> txs,
                                            std::span<const Category> categories,
                                            std::span<const std::optional<Quintuple>> quintuples,
                                            const PairingParams& params, std::size_t* failures,
                                            std::vector<std::string>* diagnostics) {
  std::vector<Identifier> out;
  std::size_t failed = 0;
  for (std::size_t c = 0; c < categories.size(); ++c) {
    if (!quintuples[c]) continue;
    for (auto m : categories[c].members) {
      std::string error;
      if (auto id = extract_identifier(txs[m], m, *quintuples[c], params, &error)) {
        out.push_back(std::move(*id));
      } else {
        ++failed;
        if (diagnostics) diagnostics->push_back(txs[m].tx_hash.hex() + ": " + error);
      }
    }
  }
  if (failures) *failures = failed;
  return out;
}

namespace {

std::optional<Quintuple> top_one(const Inference& inf) {
  if (!inf.inferable) return std::nullopt;
  Quintuple q;
  for (auto r : kAllRoles) {
    const auto& list = inf.candidates.roles[r];
    if (list.empty()) return std::nullopt;
    q[r] = list.front().path;
  }
  return q;
}

}  // namespace

PipelineRun run_pipeline(const Dataset& data, const Provider& provider, const PipelineOptions& options,
                         Selection selection) {
  PipelineRun run;
  run.source.side = Side::Source;
  run.destination.side = Side::Destination;
  auto& src = run.source;
  auto& dst = run.destination;

  src.categories = categorize(data.source);
  dst.categories = categorize(data.destination);
  src.inferences = infer_all(src.categories, data.source, provider, options.inference);
  dst.inferences = infer_all(dst.categories, data.destination, provider, options.inference);

  if (selection == Selection::Examiner) {
    // Each side is validated against the other side's candidate destinations.
    auto src_view = build_counterpart(data.source, src.categories, src.inferences);
    auto dst_view = build_counterpart(data.destination, dst.categories, dst.inferences);
    auto examine_side = [&](SideRun& side, const std::vector<TransactionInstance>& txs, const Counterpart& other) {
      side.report = examine(side.side, side.categories, side.inferences, txs, other, options.params, options.examiner);
      for (const auto& c : side.report.categories) side.quintuples.push_back(c.quintuple);
    };
    examine_side(src, data.source, dst_view);
    examine_side(dst, data.destination, src_view);
  } else {
    for (const auto& inf : src.inferences) src.quintuples.push_back(top_one(inf));
    for (const auto& inf : dst.inferences) dst.quintuples.push_back(top_one(inf));
  }

  src.identifiers = extract_identifiers(data.source, src.categories, src.quintuples, options.params,
                                        &src.extraction_failures, &src.diagnostics);
  dst.identifiers = extract_identifiers(data.destination, dst.categories, dst.quintuples, options.params,
                                        &dst.extraction_failures, &dst.diagnostics);
  run.pairs = pair_all(src.identifiers, dst.identifiers, options.params, options.pairing);
  return run;
}

HashPairs pair_set(std::span<const Pair> pairs) {
  HashPairs out;
  for (const auto& p : pairs) out.emplace(p.src_hash, p.dst_hash);
  return out;
}

std::optional<HashPair> earliest_truth_pair(const HashPairs& truth, const Dataset& data) {
  std::map<Hash32, std::int64_t> ts;
  for (const auto& tx : data.source) ts[tx.tx_hash] = tx.timestamp;
  std::optional<HashPair> best;
  std::tuple<std::int64_t, Hash32> best_key;
  for (const auto& p : truth) {
    auto it = ts.find(p.first);
    if (it == ts.end()) continue;
    std::tuple<std::int64_t, Hash32> key{it->second, p.first};
    if (!best || key < best_key) {
      best = p;
      best_key = key;
    }
  }
  return best;
}

HashPairs baseline_chronological(const Dataset& data, const HashPair& anchor) {
  auto order = [](const std::vector<TransactionInstance>& txs) {
    std::vector<std::pair<std::int64_t, Hash32>> keys;
    for (const auto& tx : txs) keys.emplace_back(tx.timestamp, tx.tx_hash);
    std::sort(keys.begin(), keys.end());
    return keys;
  };
  auto src = order(data.source);
  auto dst = order(data.destination);
  auto find = [](const auto& keys, const Hash32& h) {
    return std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.second == h; });
  };
  auto si = find(src, anchor.first);
  auto di = find(dst, anchor.second);
  HashPairs out;
  if (si == src.end() || di == dst.end()) return out;
  for (; si != src.end() && di != dst.end(); ++si, ++di) out.emplace(si->second, di->second);
  return out;
}

PipelineRun baseline_similarity(const Dataset& data, const RoleLexicon& lexicon, const PipelineOptions& options,
                                const SimilarityOptions& similarity) {
  PipelineOptions opt = options;
  opt.inference.prefilter = similarity.prefilter;
  LexicalProvider provider(lexicon, opt.inference.top_k);
  return run_pipeline(data, provider, opt, similarity.with_examiner ? Selection::Examiner : Selection::TopOne);
}

std::vector<AblationRow> ablation_report(const PipelineRun& run) {
  std::vector<AblationRow> rows;
  for (const auto* side : {&run.source, &run.destination}) {
    AblationRow row;
    row.side = side->side;
    row.combinations = combination_count(side->categories);
    std::vector<CandidateQuintuple> inferred;
    for (const auto& inf : side->inferences) {
      if (inf.inferable) inferred.push_back(inf.candidates);
    }
    row.candidates = candidate_space_size(inferred);
    row.survivors = static_cast<std::size_t>(
        std::count_if(side->quintuples.begin(), side->quintuples.end(), [](const auto& q) { return q.has_value(); }));
    row.categories = side->categories.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepCell> sweep(std::span<const Identifier> sources, std::span<const Identifier> destinations,
                             const PairingParams& base, std::span<const std::int64_t> timewindows,
                             std::span<const double> fee_rates, const HashPairs& truth) {
  std::vector<std::future<SweepCell>> jobs;
  for (auto tw : timewindows) {
    for (auto fee : fee_rates) {
      PairingParams params = base;
      params.timewindow = tw;
      params.fee_rate = FeeRate::from_fraction(fee);
      params.validate();
      jobs.push_back(std::async(std::launch::async, [=, &truth]() {
        SweepCell cell;
        cell.timewindow = tw;
        cell.fee_rate = fee;
        cell.scores = score(pair_all(sources, destinations, params), truth);
        return cell;
      }));
    }
  }
  std::vector<SweepCell> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::string sweep_csv(std::span<const SweepCell> cells) {
  std::ostringstream os;
  os << "timewindow,fee_rate,precision,recall,f1,predicted,correct,truth\n";
  for (const auto& c : cells) {
    os << c.timewindow << ',' << c.fee_rate << ',' << c.scores.precision << ',' << c.scores.recall << ','
       << c.scores.f1 << ',' << c.scores.predicted << ',' << c.scores.correct << ',' << c.scores.truth << '\n';
  }
  return os.str();
}

}  // namespace xbridge
