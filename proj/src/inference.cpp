#include "xbridge/inference.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

#include "xbridge/rng.hpp"

namespace xbridge {

RoleLexicon RoleLexicon::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("lexicon must be a JSON object");
  RoleLexicon lex;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto role = role_from_name(it.key());
    if (!role) throw std::invalid_argument("lexicon: unknown role '" + it.key() + "'");
    if (!it.value().is_object()) throw std::invalid_argument("lexicon: role '" + it.key() + "' must map terms to weights");
    for (auto t = it.value().begin(); t != it.value().end(); ++t) {
      if (!t.value().is_number()) throw std::invalid_argument("lexicon: weight for '" + t.key() + "' is not a number");
      double w = t.value().get<double>();
      if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("lexicon: weight for '" + t.key() + "' outside (0, 1]");
      std::string term = t.key();
      std::transform(term.begin(), term.end(), term.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      lex.terms[*role][term] = w;
    }
  }
  for (auto r : kAllRoles) {
    if (lex.terms[r].empty()) throw std::invalid_argument("lexicon: role " + std::string(role_name(r)) + " has no terms");
  }
  return lex;
}

RoleLexicon RoleLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open lexicon " + path.string());
  try {
    return from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::ordered_json::exception& e) {
    throw std::invalid_argument("lexicon " + path.string() + ": " + e.what());
  }
}

Sample sample_category(const Category& cat, std::span<const TransactionInstance> txs, std::size_t n,
                       std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample size must be at least 1");
  if (cat.members.empty()) throw std::invalid_argument("cannot sample an empty category");
  std::vector<std::size_t> pool = cat.members;
  std::sort(pool.begin(), pool.end());
  Rng rng(seed_from(cat.key, seed));
  std::size_t take = std::min(n, pool.size());
  for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[rng.uniform(i, pool.size() - 1)]);
  Sample out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(&txs[pool[i]]);
  return out;
}

std::vector<std::string> tokenize_path(std::string_view rendered) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    bool numeric = !cur.empty() && std::all_of(cur.begin(), cur.end(), [](unsigned char c) { return std::isdigit(c); });
    if (!cur.empty() && !numeric) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < rendered.size(); ++i) {
    auto c = static_cast<unsigned char>(rendered[i]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      auto prev = static_cast<unsigned char>(rendered[i - 1]);
      bool next_lower = i + 1 < rendered.size() && std::islower(static_cast<unsigned char>(rendered[i + 1]));
      bool boundary = (std::isupper(c) && (std::islower(prev) || std::isdigit(prev))) ||
                      (std::isupper(c) && std::isupper(prev) && next_lower) ||
                      (std::isdigit(c) != 0) != (std::isdigit(prev) != 0);
      if (boundary) flush();
    }
    cur += static_cast<char>(std::tolower(c));
  }
  flush();
  return out;
}

double lexical_score(const std::vector<std::string>& tokens, const std::map<std::string, double>& weights) {
  if (tokens.empty() || weights.empty()) return 0.0;
  std::map<std::string, double> tf;
  for (const auto& t : tokens) tf[t] += 1.0;
  double dot = 0.0;
  double tf_norm = 0.0;
  for (const auto& [term, count] : tf) {
    tf_norm += count * count;
    if (auto it = weights.find(term); it != weights.end()) dot += count * it->second;
  }
  if (dot == 0.0) return 0.0;
  double w_norm = 0.0;
  for (const auto& [term, w] : weights) w_norm += w * w;
  return dot / (std::sqrt(tf_norm) * std::sqrt(w_norm));
}

namespace {

void sort_candidates(std::vector<Candidate>& list) {
  std::sort(list.begin(), list.end(), [](const Candidate& a, const Candidate& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.path.render() < b.path.render();
  });
}

}  // namespace

ProviderResponse lexical_propose(const Category& cat, const RoleLexicon& lexicon, std::size_t k) {
  if (k == 0) throw std::invalid_argument("top-k must be at least 1");
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(cat.field_set.size());
  for (const auto& f : cat.field_set) tokens.push_back(tokenize_path(f));

  ProviderResponse out;
  for (auto r : kAllRoles) {
    std::vector<Candidate> scored;
    for (std::size_t i = 0; i < cat.field_set.size(); ++i) {
      double s = lexical_score(tokens[i], lexicon.terms[r]);
      if (s > 0.0) scored.push_back(Candidate{FieldPath::parse(cat.field_set[i]), s});
    }
    sort_candidates(scored);
    if (scored.size() > k) scored.resize(k);
    if (!scored.empty()) {
      double top = scored.front().confidence;
      for (auto& c : scored) c.confidence /= top;
    }
    out.roles[r] = std::move(scored);
  }
  return out;
}

AllowedFields type_prefilter(const Category& cat, const Sample& sample) {
  if (sample.empty()) throw std::invalid_argument("type prefilter needs a non-empty sample");
  AllowedFields out;
  for (const auto& rendered : cat.field_set) {
    FieldPath path = FieldPath::parse(rendered);
    std::optional<ValueKind> kind;
    bool agree = true;
    for (const auto* tx : sample) {
      auto v = resolve(*tx, path);
      if (!v || (kind && *kind != v->kind())) {
        agree = false;
        break;
      }
      kind = v->kind();
    }
    if (!agree || !kind) continue;
    if (*kind == ValueKind::Address || *kind == ValueKind::Text) {
      out[Role::D].insert(rendered);
      out[Role::T].insert(rendered);
    } else if (*kind == ValueKind::UInt) {
      out[Role::C].insert(rendered);
      out[Role::A].insert(rendered);
      out[Role::Ts].insert(rendered);
    }
  }
  return out;
}

Inference compose_candidates(const ProviderResponse& response, const AllowedFields* prefilter, std::size_t k) {
  Inference out;
  out.diagnostics = response.diagnostics;
  out.inferable = true;
  for (auto r : kAllRoles) {
    std::vector<Candidate> kept;
    for (const auto& c : response.roles[r]) {
      if (kept.size() == k) break;
      if (prefilter && !(*prefilter)[r].contains(c.path.render())) continue;
      kept.push_back(c);
    }
    if (kept.empty() && prefilter) {
      for (const auto& f : (*prefilter)[r]) kept.push_back(Candidate{FieldPath::parse(f), 1.0});
      if (!kept.empty()) {
        out.diagnostics.push_back("role " + std::string(role_name(r)) + " widened to " + std::to_string(kept.size()) +
                                  " type-compatible fields");
      }
    }
    if (kept.empty()) {
      out.inferable = false;
      out.diagnostics.push_back("role " + std::string(role_name(r)) + " has no candidates");
    }
    sort_candidates(kept);
    out.candidates.roles[r] = std::move(kept);
  }
  return out;
}

ProviderResponse LexicalProvider::propose(const Category& cat, const Sample&) const {
  return lexical_propose(cat, lexicon_, k_);
}

std::vector<Inference> infer_all(std::span<const Category> categories, std::span<const TransactionInstance> txs,
                                 const Provider& provider, const InferenceOptions& options) {
  std::vector<Inference> out(categories.size());
  auto run = [&](std::size_t i) {
    const auto& cat = categories[i];
    if (!cat.pairable()) {
      Inference inf;
      inf.diagnostics.push_back("category has fewer than five fields");
      return inf;
    }
    Sample sample = sample_category(cat, txs, options.sample_size, options.seed);
    ProviderResponse response = provider.propose(cat, sample);
    if (!options.prefilter) return compose_candidates(response, nullptr, options.top_k);
    AllowedFields allowed = type_prefilter(cat, sample);
    return compose_candidates(response, &allowed, options.top_k);
  };

  std::size_t cap = std::max<std::size_t>(1, options.max_in_flight);
  for (std::size_t start = 0; start < categories.size(); start += cap) {
    std::size_t end = std::min(categories.size(), start + cap);
    if (end - start == 1) {
      out[start] = run(start);
      continue;
    }
    std::vector<std::future<Inference>> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(std::async(std::launch::async, run, i));
    for (std::size_t i = start; i < end; ++i) out[i] = batch[i - start].get();
  }
  return out;
}

}  // namespace xbridge
