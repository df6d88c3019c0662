#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "kbforge/errors.hpp"
#include "kbforge/llm_backend.hpp"

namespace kbforge {

/// Connection settings for an OpenAI-compatible chat-completions endpoint.
struct HttpEndpointConfig {
  std::string base_url = "https://api.openai.com";  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4.1";
  double temperature = 0.0;
  std::string api_key_env = "KBFORGE_API_KEY";
  int retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::seconds timeout{120};

  static HttpEndpointConfig from_profile(const std::string& profile) {
    HttpEndpointConfig cfg;
    if (profile == "openai" || profile.empty()) return cfg;
    cfg.base_url = profile;
    return cfg;
  }
};

inline std::string read_api_key(const HttpEndpointConfig& cfg) {
  const char* value = std::getenv(cfg.api_key_env.c_str());
  return value ? std::string(value) : std::string();
}

namespace detail {

inline bool is_transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

inline std::string extract_completion_text(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError("endpoint returned a non-JSON body");
  }
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw BackendError("endpoint response has no choices[0].message.content");
  }
}

}  // namespace detail

/// Sends `prompt` as a single user message and returns the completion text.
/// Transport errors and 408/429/5xx responses are retried `cfg.retries` times
/// with exponential backoff; other HTTP failures are reported immediately.
inline std::string http_expand(const HttpEndpointConfig& cfg, const std::string& api_key, const std::string& prompt) {
  if (api_key.empty()) throw BackendError("API key is empty (set " + cfg.api_key_env + ")");

  const nlohmann::json request = {
      {"model", cfg.model},
      {"temperature", cfg.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  const std::string payload = request.dump();
  const httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(cfg.backoff_base * (1 << (attempt - 1)));

    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout);
    client.set_read_timeout(cfg.timeout);
    client.set_write_timeout(cfg.timeout);
    auto result = client.Post(cfg.path, headers, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      last_status = 0;
      continue;
    }
    if (result->status >= 200 && result->status < 300) return detail::extract_completion_text(result->body);
    last_status = result->status;
    last_error = "HTTP status " + std::to_string(result->status);
    if (!detail::is_transient_status(result->status)) throw BackendError(last_error, last_status);
  }
  throw BackendError("request failed after " + std::to_string(cfg.retries + 1) + " attempts: " + last_error,
                     last_status);
}

class HttpBackend final : public LLMBackend {
 public:
  explicit HttpBackend(HttpEndpointConfig cfg) : cfg_(std::move(cfg)), api_key_(read_api_key(cfg_)) {
    if (api_key_.empty()) throw BackendError("API key is empty (set " + cfg_.api_key_env + ")");
  }

  HttpBackend(HttpEndpointConfig cfg, std::string api_key) : cfg_(std::move(cfg)), api_key_(std::move(api_key)) {
    if (api_key_.empty()) throw BackendError("API key is empty");
  }

  std::string expand(const std::string& topic, int breadth, Domain domain, OntologyMode mode) override {
    return http_expand(cfg_, api_key_, build_prompt(topic, breadth, domain, mode));
  }

  std::string classify(const std::string& topic) override {
    return http_expand(cfg_, api_key_, build_classification_prompt(topic));
  }

  bool deterministic() const override { return false; }

 private:
  HttpEndpointConfig cfg_;
  std::string api_key_;
};

}  // namespace kbforge
