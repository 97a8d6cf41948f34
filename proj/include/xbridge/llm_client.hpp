#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xbridge/inference.hpp"

namespace xbridge {

struct LlmEndpoint {
  /// http://host[:port]/path
  std::string url;
  std::string model;
  int max_tokens = 1024;
  std::string prompt_template;
  std::string fewshot;
  std::chrono::milliseconds timeout{30000};
  /// Extra attempts after a malformed response.
  int retries = 1;
};

/// Replaces {{SAMPLE}}, {{FEWSHOT}} and {{SCHEMA}} in the template.
std::string render_prompt(const std::string& tmpl, const std::string& sample, const std::string& fewshot,
                          const std::string& schema);

/// One "path = value" line per leaf for each sampled instance.
std::string serialize_sample(const Sample& sample);

/// Output-format instruction, including the list of valid field paths.
std::string output_schema(const Category& cat);

/// Parses a provider reply. Returns nullopt when no well-formed response
/// object is present; paths outside the category are dropped with a
/// diagnostic instead.
std::optional<ProviderResponse> parse_llm_response(const std::string& body, const Category& cat);

/// Sends one prompt; returns the response body, or nullopt on transport failure
/// or a non-2xx status (reason in `error`).
using Transport = std::function<std::optional<std::string>(const std::string& request_body, std::string& error)>;

Transport http_transport(const LlmEndpoint& endpoint);

/// Provider backed by an external model. Never fails: transport errors and
/// repeated malformed replies fall back to the lexical provider.
class LlmProvider : public Provider {
 public:
  LlmProvider(LlmEndpoint endpoint, LexicalProvider fallback);
  LlmProvider(LlmEndpoint endpoint, LexicalProvider fallback, Transport transport);

  ProviderResponse propose(const Category& cat, const Sample& sample) const override;

 private:
  LlmEndpoint endpoint_;
  LexicalProvider fallback_;
  Transport transport_;
};

}  // namespace xbridge
