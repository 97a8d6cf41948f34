#include "xbridge/llm_client.hpp"

#include <algorithm>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace xbridge {

namespace {

void replace_all(std::string& text, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
}

bool has_role_key(const nlohmann::json& j) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (role_from_name(it.key())) return true;
  }
  return false;
}

// The reply may be the object itself, or wrap it in prose or in a
// completion-style envelope ({"text": "..."}).
std::optional<nlohmann::json> locate_object(const std::string& body, int depth = 0) {
  auto first = body.find('{');
  auto last = body.rfind('}');
  if (first == std::string::npos || last == std::string::npos || last < first) return std::nullopt;
  nlohmann::json j = nlohmann::json::parse(body.substr(first, last - first + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (has_role_key(j)) return j;
  if (depth > 0) return std::nullopt;
  for (const char* key : {"text", "completion", "content", "output"}) {
    if (j.contains(key) && j[key].is_string()) return locate_object(j[key].get<std::string>(), depth + 1);
  }
  return std::nullopt;
}

std::pair<std::string, int> split_url(const std::string& url, std::string& path) {
  const std::string scheme = "http://";
  if (!url.starts_with(scheme)) throw std::invalid_argument("LLM endpoint must be an http:// URL: " + url);
  std::string rest = url.substr(scheme.size());
  auto slash = rest.find('/');
  path = slash == std::string::npos ? "/" : rest.substr(slash);
  std::string hostport = rest.substr(0, slash);
  int port = 80;
  if (auto colon = hostport.rfind(':'); colon != std::string::npos) {
    port = std::stoi(hostport.substr(colon + 1));
    hostport = hostport.substr(0, colon);
  }
  return {hostport, port};
}

}  // namespace

std::string render_prompt(const std::string& tmpl, const std::string& sample, const std::string& fewshot,
                          const std::string& schema) {
  std::string out = tmpl;
  replace_all(out, "{{FEWSHOT}}", fewshot);
  replace_all(out, "{{SCHEMA}}", schema);
  replace_all(out, "{{SAMPLE}}", sample);
  return out;
}

std::string serialize_sample(const Sample& sample) {
  std::string out;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out += "# instance " + std::to_string(i + 1) + " (chain " + std::to_string(sample[i]->chain) + ", " +
           std::string(side_name(sample[i]->side)) + ")\n";
    std::set<std::string> seen;
    for_each_leaf(*sample[i], [&](const FieldPath& p, const Value& v) {
      if (seen.insert(p.render()).second) out += p.render() + " = " + to_display(v) + "\n";
    });
  }
  return out;
}

std::string output_schema(const Category& cat) {
  std::string out =
      "Answer with one JSON object and nothing else. Keys are the roles D, C, T, A, Ts; each value is a list of "
      "{\"field\": <path>, \"confidence\": <number in [0,1]>} ordered by confidence. Use only these paths:\n";
  for (const auto& f : cat.field_set) out += f + "\n";
  return out;
}

std::optional<ProviderResponse> parse_llm_response(const std::string& body, const Category& cat) {
  auto obj = locate_object(body);
  if (!obj) return std::nullopt;
  std::set<std::string> fields(cat.field_set.begin(), cat.field_set.end());
  ProviderResponse out;
  for (auto it = obj->begin(); it != obj->end(); ++it) {
    auto role = role_from_name(it.key());
    if (!role) continue;
    if (!it.value().is_array()) return std::nullopt;
    for (const auto& e : it.value()) {
      if (!e.is_object() || !e.contains("field") || !e["field"].is_string()) return std::nullopt;
      double conf = 1.0;
      if (e.contains("confidence")) {
        if (!e["confidence"].is_number()) return std::nullopt;
        conf = e["confidence"].get<double>();
        if (!(conf >= 0.0 && conf <= 1.0)) return std::nullopt;
      }
      std::string field = e["field"].get<std::string>();
      if (!fields.contains(field)) {
        out.diagnostics.push_back("dropped unknown field for role " + std::string(role_name(*role)) + ": " + field);
        continue;
      }
      auto& list = out.roles[*role];
      bool dup = std::any_of(list.begin(), list.end(), [&](const Candidate& c) { return c.path.render() == field; });
      if (!dup) list.push_back(Candidate{FieldPath::parse(field), conf});
    }
  }
  for (auto r : kAllRoles) {
    std::stable_sort(out.roles[r].begin(), out.roles[r].end(), [](const Candidate& a, const Candidate& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      return a.path.render() < b.path.render();
    });
  }
  return out;
}

Transport http_transport(const LlmEndpoint& endpoint) {
  std::string path;
  auto [host, port] = split_url(endpoint.url, path);
  auto timeout = endpoint.timeout;
  return [host, port, path, timeout](const std::string& request, std::string& error) -> std::optional<std::string> {
    httplib::Client client(host, port);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    auto res = client.Post(path, request, "application/json");
    if (!res) {
      error = "transport: " + httplib::to_string(res.error());
      return std::nullopt;
    }
    if (res->status < 200 || res->status >= 300) {
      error = "HTTP status " + std::to_string(res->status);
      return std::nullopt;
    }
    return res->body;
  };
}

LlmProvider::LlmProvider(LlmEndpoint endpoint, LexicalProvider fallback)
    : endpoint_(std::move(endpoint)), fallback_(std::move(fallback)) {
  transport_ = http_transport(endpoint_);
}

LlmProvider::LlmProvider(LlmEndpoint endpoint, LexicalProvider fallback, Transport transport)
    : endpoint_(std::move(endpoint)), fallback_(std::move(fallback)), transport_(std::move(transport)) {}

ProviderResponse LlmProvider::propose(const Category& cat, const Sample& sample) const {
  nlohmann::json request;
  request["model"] = endpoint_.model;
  request["prompt"] = render_prompt(endpoint_.prompt_template, serialize_sample(sample), endpoint_.fewshot,
                                    output_schema(cat));
  request["max_tokens"] = endpoint_.max_tokens;
  const std::string body = request.dump();

  std::vector<std::string> notes;
  for (int attempt = 0; attempt <= endpoint_.retries; ++attempt) {
    std::string error;
    auto reply = transport_(body, error);
    if (!reply) {
      notes.push_back("provider unreachable (" + error + ")");
      break;
    }
    if (auto parsed = parse_llm_response(*reply, cat)) {
      parsed->diagnostics.insert(parsed->diagnostics.begin(), notes.begin(), notes.end());
      return *parsed;
    }
    notes.push_back("malformed provider reply on attempt " + std::to_string(attempt + 1));
  }
  ProviderResponse out = fallback_.propose(cat, sample);
  notes.push_back("fell back to lexical candidates");
  out.diagnostics.insert(out.diagnostics.begin(), notes.begin(), notes.end());
  return out;
}

}  // namespace xbridge
