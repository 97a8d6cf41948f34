#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "xbridge/categorizer.hpp"
#include "xbridge/llm_client.hpp"

using namespace xbridge;

namespace {

Category category() {
  Category c;
  c.field_set = {"transaction[f].amount", "transaction[f].chain", "transaction[f].receiver", "transaction[f].token",
                 "tx.timestamp"};
  c.key = category_key(c.field_set);
  c.members = {0};
  return c;
}

LexicalProvider fallback() {
  return LexicalProvider(RoleLexicon::load(XBRIDGE_DATA_DIR "/lexicon.json"), 5);
}

const char* kGood = R"({"D": [{"field": "transaction[f].receiver", "confidence": 0.9}],
  "chain": [{"field": "transaction[f].chain"}],
  "T": [{"field": "transaction[f].token", "confidence": 0.4}, {"field": "transaction[f].receiver", "confidence": 0.8}],
  "A": [{"field": "transaction[f].amount", "confidence": 1}],
  "Ts": [{"field": "tx.timestamp", "confidence": 1}]})";

bool mentions(const std::vector<std::string>& notes, const std::string& needle) {
  return std::any_of(notes.begin(), notes.end(), [&](const std::string& n) { return n.find(needle) != std::string::npos; });
}

}  // namespace

TEST_SUITE("llm") {
  TEST_CASE("prompt rendering replaces every placeholder") {
    auto p = render_prompt("{{FEWSHOT}}|{{SAMPLE}}|{{SCHEMA}}|{{SAMPLE}}", "s", "f", "c");
    CHECK(p == "f|s|c|s");
    auto schema = output_schema(category());
    CHECK(schema.find("transaction[f].receiver") != std::string::npos);
  }

  TEST_CASE("response parsing accepts plain, prose and enveloped objects") {
    auto cat = category();
    auto plain = parse_llm_response(kGood, cat);
    REQUIRE(plain);
    CHECK(plain->roles[Role::C].front().confidence == 1.0);
    CHECK(plain->roles[Role::T].front().path.render() == "transaction[f].receiver");

    auto prose = parse_llm_response(std::string("Here you go:\n") + kGood + "\nHope that helps.", cat);
    REQUIRE(prose);
    CHECK(prose->roles[Role::D] == plain->roles[Role::D]);

    nlohmann::json env = {{"id", "x"}, {"text", kGood}};
    auto wrapped = parse_llm_response(env.dump(), cat);
    REQUIRE(wrapped);
    CHECK(wrapped->roles[Role::A] == plain->roles[Role::A]);
  }

  TEST_CASE("malformed replies are rejected and unknown paths dropped") {
    auto cat = category();
    CHECK_FALSE(parse_llm_response("no json here", cat));
    CHECK_FALSE(parse_llm_response(R"({"answer": 42})", cat));
    CHECK_FALSE(parse_llm_response(R"({"D": "transaction[f].receiver"})", cat));
    CHECK_FALSE(parse_llm_response(R"({"D": [{"confidence": 1}]})", cat));
    CHECK_FALSE(parse_llm_response(R"({"D": [{"field": "tx.timestamp", "confidence": 3}]})", cat));
    CHECK_FALSE(parse_llm_response(R"({"D": [{"field": "tx.timestamp")", cat));
    auto partial = parse_llm_response(R"({"D": [{"field": "transaction[g].who"}, {"field": "transaction[f].receiver"}]})", cat);
    REQUIRE(partial);
    CHECK(partial->roles[Role::D].size() == 1);
    CHECK(mentions(partial->diagnostics, "transaction[g].who"));
  }

  TEST_CASE("provider retries malformed replies then falls back") {
    auto cat = category();
    TransactionInstance tx;
    Sample sample = {&tx};
    LlmEndpoint ep;
    ep.retries = 1;

    int calls = 0;
    LlmProvider twice_bad(ep, fallback(), [&](const std::string&, std::string&) -> std::optional<std::string> {
      ++calls;
      return std::string("garbage");
    });
    auto out = twice_bad.propose(cat, sample);
    CHECK(calls == 2);
    CHECK(mentions(out.diagnostics, "fell back"));
    CHECK(out.roles[Role::D] == fallback().propose(cat, sample).roles[Role::D]);

    calls = 0;
    LlmProvider recovers(ep, fallback(), [&](const std::string&, std::string&) -> std::optional<std::string> {
      return ++calls == 1 ? std::string("{}") : std::string(kGood);
    });
    auto good = recovers.propose(cat, sample);
    CHECK(calls == 2);
    CHECK_FALSE(mentions(good.diagnostics, "fell back"));
    CHECK(good.roles[Role::T].front().path.render() == "transaction[f].receiver");

    calls = 0;
    LlmProvider down(ep, fallback(), [&](const std::string&, std::string& err) -> std::optional<std::string> {
      ++calls;
      err = "refused";
      return std::nullopt;
    });
    auto fb = down.propose(cat, sample);
    CHECK(calls == 1);
    CHECK(mentions(fb.diagnostics, "refused"));
  }

  TEST_CASE("http transport against a local server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string last_body;
    server.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      if (++hits <= 2) {
        res.set_content("{\"text\": \"I am not sure\"}", "application/json");
      } else {
        res.set_content(nlohmann::json{{"text", kGood}}.dump(), "application/json");
      }
    });
    server.Post("/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto cat = category();
    TransactionInstance tx;
    Sample sample = {&tx};
    LlmEndpoint ep;
    ep.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/completions";
    ep.model = "mock";
    ep.prompt_template = "{{SCHEMA}}";
    ep.timeout = std::chrono::milliseconds(2000);
    ep.retries = 1;

    LlmProvider provider(ep, fallback());
    auto first = provider.propose(cat, sample);
    CHECK(hits == 2);
    CHECK(mentions(first.diagnostics, "fell back"));
    auto request = nlohmann::json::parse(last_body);
    CHECK(request["model"] == "mock");
    CHECK(request["prompt"].get<std::string>().find("tx.timestamp") != std::string::npos);

    auto second = provider.propose(cat, sample);
    CHECK(hits == 3);
    CHECK(second.roles[Role::T].front().path.render() == "transaction[f].receiver");

    LlmEndpoint failing = ep;
    failing.url = "http://127.0.0.1:" + std::to_string(port) + "/fail";
    std::string error;
    CHECK_FALSE(http_transport(failing)("{}", error));
    CHECK(error.find("500") != std::string::npos);

    server.stop();
    worker.join();

    LlmEndpoint https = ep;
    https.url = "https://example.invalid/";
    CHECK_THROWS_AS(http_transport(https), std::invalid_argument);
  }
}
