#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "xbridge/abi.hpp"
#include "xbridge/categorizer.hpp"
#include "xbridge/harness.hpp"
#include "xbridge/json_io.hpp"
#include "xbridge/llm_client.hpp"
#include "xbridge/simulator.hpp"

namespace fs = std::filesystem;
using namespace xbridge;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  fs::path out;
  fs::path config_dir;
  Json config = Json::object();

  const Json& section(const char* name) const {
    static const Json empty = Json::object();
    if (!config.contains(name)) return empty;
    const Json& s = config.at(name);
    if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
    return s;
  }

  fs::path resolve_path(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : config_dir / path;
  }

  fs::path input(const char* key, const char* fallback) const {
    if (!config.contains(key)) return out / fallback;
    if (!config.at(key).is_string()) throw ConfigError(std::string("config key '") + key + "' must be a path");
    return resolve_path(config.at(key).get<std::string>());
  }
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void require_file(const fs::path& path, const char* hint) {
  if (!fs::exists(path)) throw DataError("missing " + path.string() + " (" + hint + ")");
}

// ---------------------------------------------------------------------------
// Configuration

PairingParams pairing_params(const Context& ctx) {
  Json merged = Json::object();
  auto file = ctx.out / "pairing_params.json";
  if (fs::exists(file)) merged = read_json_file(file);
  for (const auto& [k, v] : ctx.section("params").items()) merged[k] = v;
  return params_from_json(merged);
}

RoleLexicon lexicon(const Context& ctx) {
  fs::path path = ctx.config.contains("lexicon") ? ctx.resolve_path(ctx.config.at("lexicon").get<std::string>())
                                                 : fs::path(XBRIDGE_DATA_DIR) / "lexicon.json";
  return RoleLexicon::load(path);
}

PipelineOptions pipeline_options(const Context& ctx) {
  PipelineOptions o;
  o.params = pairing_params(ctx);
  const auto& inf = ctx.section("inference");
  o.inference.sample_size = get_or(inf, "sample_size", o.inference.sample_size);
  o.inference.top_k = get_or(inf, "top_k", o.inference.top_k);
  o.inference.seed = get_or(inf, "seed", o.inference.seed);
  o.inference.prefilter = get_or(inf, "prefilter", o.inference.prefilter);
  o.inference.max_in_flight = get_or(ctx.section("provider"), "max_in_flight", o.inference.max_in_flight);
  if (o.inference.sample_size == 0 || o.inference.top_k == 0) {
    throw ConfigError("inference sample_size and top_k must be positive");
  }
  const auto& ex = ctx.section("examiner");
  o.examiner.validation_sample = get_or(ex, "validation_sample", o.examiner.validation_sample);
  o.examiner.seed = get_or(ex, "seed", o.examiner.seed);
  o.examiner.symmetric = get_or(ex, "symmetric", o.examiner.symmetric);
  o.examiner.min_support = get_or(ex, "min_support", o.examiner.min_support);
  if (!(o.examiner.min_support >= 0.0 && o.examiner.min_support <= 1.0)) {
    throw ConfigError("examiner.min_support must lie in [0, 1]");
  }
  if (o.examiner.validation_sample == 0) throw ConfigError("examiner validation_sample must be positive");
  return o;
}

std::unique_ptr<Provider> make_provider(const Context& ctx, const PipelineOptions& o) {
  const auto& p = ctx.section("provider");
  auto kind = get_or<std::string>(p, "kind", "lexical");
  LexicalProvider lexical(lexicon(ctx), o.inference.top_k);
  if (kind == "lexical") return std::make_unique<LexicalProvider>(std::move(lexical));
  if (kind != "llm") throw ConfigError("provider kind must be 'lexical' or 'llm', got '" + kind + "'");
  LlmEndpoint e;
  e.url = get_or<std::string>(p, "endpoint", "");
  if (e.url.rfind("http://", 0) != 0) throw ConfigError("provider endpoint must be an http:// URL");
  e.model = get_or<std::string>(p, "model", "");
  e.max_tokens = get_or(p, "max_tokens", e.max_tokens);
  e.retries = get_or(p, "retries", e.retries);
  e.timeout = std::chrono::milliseconds(get_or<std::int64_t>(p, "timeout_ms", e.timeout.count()));
  e.prompt_template = read_text(p.contains("prompt_template") ? ctx.resolve_path(p.at("prompt_template"))
                                                              : fs::path(XBRIDGE_DATA_DIR) / "prompt_template.txt");
  e.fewshot = read_text(p.contains("fewshot") ? ctx.resolve_path(p.at("fewshot"))
                                              : fs::path(XBRIDGE_DATA_DIR) / "fewshot.txt");
  return std::make_unique<LlmProvider>(std::move(e), std::move(lexical));
}

// ---------------------------------------------------------------------------
// Shared loading

Dataset load_dataset(const Context& ctx) {
  auto src = ctx.input("source", "source.jsonl");
  auto dst = ctx.input("destination", "destination.jsonl");
  require_file(src, "run `xbridge decode` first");
  require_file(dst, "run `xbridge decode` first");
  return Dataset{read_instances(src), read_instances(dst)};
}

TruthPairs load_truth(const Context& ctx) {
  auto path = ctx.input("truth", "truth_pairs.csv");
  require_file(path, "ground-truth pairs are needed for evaluation");
  return read_truth_csv(path);
}

Json category_json(const Category& c, std::span<const TransactionInstance> txs) {
  Json members = Json::array();
  for (auto m : c.members) members.push_back(txs[m].tx_hash.hex());
  return {{"key", c.key}, {"size", c.members.size()}, {"fields", c.field_set}, {"members", members}};
}

Json inference_json(const Category& c, const Inference& inf) {
  return {{"key", c.key},
          {"inferable", inf.inferable},
          {"candidates", candidates_to_json(inf.candidates)},
          {"diagnostics", inf.diagnostics}};
}

Json counts_json(const PhaseCounts& counts) {
  Json j = Json::object();
  for (auto r : kAllRoles) {
    j[std::string(role_name(r))] = {counts.input[r], counts.phase1[r], counts.phase2[r], counts.phase3[r]};
  }
  return j;
}

Json examination_json(const ExaminationReport& report) {
  Json list = Json::array();
  for (const auto& c : report.categories) {
    list.push_back({{"key", c.key},
                    {"members", c.members},
                    {"quintuple", c.quintuple ? quintuple_to_json(*c.quintuple) : Json()},
                    {"rejection", c.rejection},
                    {"counts", counts_json(c.counts)},
                    {"diagnostics", c.diagnostics}});
  }
  return list;
}

Json scores_json(const Scores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"predicted", s.predicted}, {"correct", s.correct}, {"truth", s.truth}};
}

Json ablation_json(const std::vector<AblationRow>& rows) {
  Json j = Json::object();
  for (const auto& r : rows) {
    j[std::string(side_name(r.side))] = {{"X", r.combinations.str()},
                                         {"Y", r.candidates.str()},
                                         {"survivors", r.survivors},
                                         {"M", r.categories}};
  }
  return j;
}

std::map<std::string, Json> keyed(const Json& list, const char* what) {
  std::map<std::string, Json> out;
  if (!list.is_array()) throw DataError(std::string(what) + " must be an array");
  for (const auto& item : list) out[item.at("key").get<std::string>()] = item;
  return out;
}

std::vector<std::optional<Quintuple>> load_quintuples(const Context& ctx, Side side,
                                                      const std::vector<Category>& cats) {
  auto path = ctx.out / "quintuples.json";
  require_file(path, "run `xbridge examine` first");
  Json j = read_json_file(path);
  std::string name(side_name(side));
  if (!j.contains(name) || !j.at(name).is_object()) throw DataError("quintuples.json lacks '" + name + "'");
  std::vector<std::optional<Quintuple>> out;
  for (const auto& c : cats) {
    if (j.at(name).contains(c.key)) {
      out.push_back(quintuple_from_json(j.at(name).at(c.key)));
    } else {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_simulate(const Context& ctx) {
  sim::ScenarioConfig cfg;
  try {
    cfg = sim::config_from_json(ctx.section("simulator"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto scenario = sim::generate(cfg);
  sim::write_scenario(scenario, ctx.out);
  std::cout << "simulated " << scenario.source_raw.size() << " source and " << scenario.destination_raw.size()
            << " destination transactions, " << scenario.truth.transfers.size() << " true pairs -> "
            << ctx.out.string() << "\n";
}

void cmd_decode(const Context& ctx) {
  auto abi_dir = ctx.input("abi_dir", "abi");
  if (!fs::is_directory(abi_dir)) throw DataError("missing ABI directory " + abi_dir.string());
  abi::Registry registry;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(abi_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> diagnostics;
  for (const auto& f : files) {
    try {
      for (auto& d : registry.load_file(f)) diagnostics.push_back(f.filename().string() + ": " + d);
    } catch (const std::exception& e) {
      throw DataError("ABI " + f.string() + ": " + e.what());
    }
  }
  auto decode_side = [&](const char* key, const char* fallback, const char* target) {
    auto path = ctx.input(key, fallback);
    require_file(path, "run `xbridge simulate` or point the config at raw data");
    std::vector<abi::RawTransaction> raw;
    std::size_t line = 0;
    for (const auto& doc : read_json_lines(path)) {
      ++line;
      try {
        raw.push_back(raw_from_json(doc));
      } catch (const std::exception& e) {
        throw DataError(path.string() + ":" + std::to_string(line) + ": " + e.what());
      }
    }
    auto txs = decode_all(raw, registry, &diagnostics);
    write_instances(ctx.out / target, txs);
    return txs.size();
  };
  auto ns = decode_side("raw_source", "raw_source.jsonl", "source.jsonl");
  auto nd = decode_side("raw_destination", "raw_destination.jsonl", "destination.jsonl");
  std::ofstream diag(ctx.out / "decode_diagnostics.txt");
  for (const auto& d : diagnostics) diag << d << "\n";
  std::cout << "decoded " << ns << " source and " << nd << " destination transactions, " << diagnostics.size()
            << " diagnostics\n";
}

void cmd_categorize(const Context& ctx) {
  auto data = load_dataset(ctx);
  auto write = [&](const std::vector<TransactionInstance>& txs, const char* file) {
    auto cats = categorize(txs);
    std::vector<Json> docs;
    for (const auto& c : cats) docs.push_back(category_json(c, txs));
    write_json_lines(ctx.out / file, docs);
    std::cout << file << ": " << cats.size() << " categories, X = " << combination_count(cats).str() << "\n";
  };
  write(data.source, "categories_source.jsonl");
  write(data.destination, "categories_destination.jsonl");
}

void cmd_infer(const Context& ctx) {
  auto data = load_dataset(ctx);
  auto opt = pipeline_options(ctx);
  auto provider = make_provider(ctx, opt);
  Json doc = Json::object();
  for (auto side : {Side::Source, Side::Destination}) {
    const auto& txs = side == Side::Source ? data.source : data.destination;
    auto cats = categorize(txs);
    auto infs = infer_all(cats, txs, *provider, opt.inference);
    Json list = Json::array();
    std::size_t inferable = 0;
    std::vector<CandidateQuintuple> cq;
    for (std::size_t i = 0; i < cats.size(); ++i) {
      list.push_back(inference_json(cats[i], infs[i]));
      if (infs[i].inferable) {
        ++inferable;
        cq.push_back(infs[i].candidates);
      }
    }
    doc[std::string(side_name(side))] = list;
    std::cout << side_name(side) << ": " << inferable << "/" << cats.size()
              << " categories inferable, Y = " << candidate_space_size(cq).str() << "\n";
  }
  write_json_file(ctx.out / "candidates.json", doc);
}

void cmd_examine(const Context& ctx) {
  auto data = load_dataset(ctx);
  auto opt = pipeline_options(ctx);
  auto path = ctx.out / "candidates.json";
  require_file(path, "run `xbridge infer` first");
  Json doc = read_json_file(path);

  struct SideState {
    std::vector<Category> cats;
    std::vector<Inference> infs;
  };
  auto load_side = [&](Side side, const std::vector<TransactionInstance>& txs) {
    SideState s;
    s.cats = categorize(txs);
    std::string name(side_name(side));
    if (!doc.contains(name)) throw DataError("candidates.json lacks '" + name + "'");
    auto by_key = keyed(doc.at(name), "candidates");
    for (const auto& c : s.cats) {
      Inference inf;
      if (auto it = by_key.find(c.key); it != by_key.end()) {
        inf.inferable = it->second.at("inferable").get<bool>();
        inf.candidates = candidates_from_json(it->second.at("candidates"));
      } else {
        inf.diagnostics.push_back("no candidates recorded for this category");
      }
      s.infs.push_back(std::move(inf));
    }
    return s;
  };
  auto src = load_side(Side::Source, data.source);
  auto dst = load_side(Side::Destination, data.destination);
  auto src_view = build_counterpart(data.source, src.cats, src.infs);
  auto dst_view = build_counterpart(data.destination, dst.cats, dst.infs);
  auto src_report = examine(Side::Source, src.cats, src.infs, data.source, dst_view, opt.params, opt.examiner);
  auto dst_report = examine(Side::Destination, dst.cats, dst.infs, data.destination, src_view, opt.params, opt.examiner);

  Json quints = Json::object();
  for (const auto* r : {&src_report, &dst_report}) {
    Json side = Json::object();
    for (const auto& c : r->categories) {
      if (c.quintuple) side[c.key] = quintuple_to_json(*c.quintuple);
    }
    quints[std::string(side_name(r->side))] = side;
    std::cout << side_name(r->side) << ": " << r->survivors() << "/" << r->categories.size()
              << " categories resolved to one quintuple\n";
  }
  write_json_file(ctx.out / "examination.json",
                  Json{{"source", examination_json(src_report)}, {"destination", examination_json(dst_report)}});
  write_json_file(ctx.out / "quintuples.json", quints);
}

void cmd_pair(const Context& ctx) {
  auto data = load_dataset(ctx);
  auto opt = pipeline_options(ctx);
  auto src_cats = categorize(data.source);
  auto dst_cats = categorize(data.destination);
  auto src_q = load_quintuples(ctx, Side::Source, src_cats);
  auto dst_q = load_quintuples(ctx, Side::Destination, dst_cats);
  std::size_t src_fail = 0;
  std::size_t dst_fail = 0;
  auto src_ids = extract_identifiers(data.source, src_cats, src_q, opt.params, &src_fail);
  auto dst_ids = extract_identifiers(data.destination, dst_cats, dst_q, opt.params, &dst_fail);
  auto pairs = pair_all(src_ids, dst_ids, opt.params);
  std::vector<Json> docs;
  for (const auto& p : pairs) docs.push_back(pair_to_json(p));
  write_json_lines(ctx.out / "pairs.jsonl", docs);
  std::cout << "paired " << pairs.size() << " transactions (" << src_fail << " source and " << dst_fail
            << " destination extraction failures)\n";
  auto truth_path = ctx.input("truth", "truth_pairs.csv");
  if (fs::exists(truth_path)) {
    auto s = score(pairs, read_truth_csv(truth_path));
    std::cout << "precision " << s.precision << " recall " << s.recall << " f1 " << s.f1 << "\n";
  }
}

void cmd_evaluate(const Context& ctx) {
  auto data = load_dataset(ctx);
  auto truth = load_truth(ctx);
  auto opt = pipeline_options(ctx);
  auto provider = make_provider(ctx, opt);
  auto lex = lexicon(ctx);

  auto run = run_pipeline(data, *provider, opt);
  Json metrics = Json::object();
  metrics["pipeline"] = scores_json(score(run.pairs, truth));

  auto transfers_path = ctx.out / "truth_transfers.jsonl";
  if (fs::exists(transfers_path)) {
    sim::Truth t;
    for (const auto& doc : read_json_lines(transfers_path)) {
      try {
        t.transfers.push_back(sim::transfer_from_json(doc));
      } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
      }
    }
    auto expected = sim::replay_truth(t, opt.params);
    metrics["expected_pairs"] = expected.size();
    metrics["pipeline_vs_expected"] = scores_json(score(run.pairs, expected));
  }

  Json baselines = Json::object();
  if (auto anchor = earliest_truth_pair(truth, data)) {
    baselines["chronological"] = scores_json(score(baseline_chronological(data, *anchor), truth));
  }
  baselines["similarity"] = scores_json(score(baseline_similarity(data, lex, opt).pairs, truth));
  baselines["similarity_examiner"] =
      scores_json(score(baseline_similarity(data, lex, opt, {.with_examiner = true}).pairs, truth));
  baselines["hybrid"] = scores_json(
      score(baseline_similarity(data, lex, opt, {.with_examiner = true, .prefilter = true}).pairs, truth));
  metrics["baselines"] = baselines;
  metrics["ablation"] = ablation_json(ablation_report(run));
  metrics["examination"] = {{"source", examination_json(run.source.report)},
                            {"destination", examination_json(run.destination.report)}};
  write_json_file(ctx.out / "metrics.json", metrics);

  auto line = [](const char* name, const Json& s) {
    std::cout << name << ": precision " << s.at("precision").get<double>() << " recall "
              << s.at("recall").get<double>() << " f1 " << s.at("f1").get<double>() << "\n";
  };
  line("pipeline", metrics["pipeline"]);
  for (const auto& [name, s] : baselines.items()) line(name.c_str(), s);
}

void cmd_sweep(const Context& ctx) {
  auto data = load_dataset(ctx);
  auto truth = load_truth(ctx);
  auto opt = pipeline_options(ctx);
  auto provider = make_provider(ctx, opt);
  const auto& s = ctx.section("sweep");
  auto tws = get_or<std::vector<std::int64_t>>(s, "timewindows", {10, 60, 600, 3600, 7200, 10800});
  auto fees = get_or<std::vector<double>>(s, "fee_rates", {0.01, 0.05, 0.1, 0.15, 0.2});
  for (auto tw : tws) {
    if (tw <= 0) throw ConfigError("sweep timewindows must be positive");
  }
  for (auto f : fees) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("sweep fee_rates must lie in [0, 1]");
  }
  auto run = run_pipeline(data, *provider, opt);
  auto cells = sweep(run.source.identifiers, run.destination.identifiers, opt.params, tws, fees, truth);
  std::ofstream(ctx.out / "sweep.csv") << sweep_csv(cells);
  auto best = std::max_element(cells.begin(), cells.end(),
                               [](const SweepCell& a, const SweepCell& b) { return a.scores.f1 < b.scores.f1; });
  if (best != cells.end()) {
    std::cout << cells.size() << " cells; best f1 " << best->scores.f1 << " at timewindow " << best->timewindow
              << " s, fee_rate " << best->fee_rate << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-chain bridge transaction pairing"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "Working directory for inputs and outputs");

  std::map<std::string, void (*)(const Context&)> commands = {
      {"simulate", cmd_simulate}, {"decode", cmd_decode},     {"categorize", cmd_categorize},
      {"infer", cmd_infer},       {"examine", cmd_examine},   {"pair", cmd_pair},
      {"evaluate", cmd_evaluate}, {"sweep", cmd_sweep}};
  std::map<std::string, std::string> help = {
      {"simulate", "Generate a synthetic two-chain dataset with ground truth"},
      {"decode", "Decode raw transactions and logs with the ABI files"},
      {"categorize", "Group decoded instances by field set"},
      {"infer", "Propose candidate fields per role for each category"},
      {"examine", "Validate candidates and keep one quintuple per category"},
      {"pair", "Match source and destination transactions"},
      {"evaluate", "Run the pipeline and baselines against ground truth"},
      {"sweep", "Score pairing over a timewindow x fee_rate grid"}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name, help[name]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    Context ctx;
    ctx.out = out_dir;
    fs::create_directories(ctx.out);
    if (!config_path.empty()) {
      ctx.config_dir = fs::path(config_path).parent_path();
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot open config " + config_path);
      try {
        ctx.config = Json::parse(in);
      } catch (const Json::exception& e) {
        throw ConfigError("config " + config_path + ": " + e.what());
      }
      if (!ctx.config.is_object()) throw ConfigError("config must be a JSON object");
    }
    for (const auto* sub : app.get_subcommands()) commands.at(sub->get_name())(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const abi::AbiError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
