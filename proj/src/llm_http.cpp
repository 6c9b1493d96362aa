#include "swasr/error.hpp"
#include "swasr/llm.hpp"
#include "swasr/timing.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that Eigen uses as a name.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <json.hpp>

namespace swasr {
namespace {

/// Holds one in-flight slot for the lifetime of a request.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& slots) : slots_(slots) { slots_.acquire(); }
  ~SlotGuard() { slots_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& slots_;
};

}  // namespace

HttpLlmClient::HttpLlmClient(HttpLlmConfig config)
    : config_(std::move(config)), slots_(std::max(1, config_.max_in_flight)) {
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("LLM base_url needs a scheme: " + config_.base_url);
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpLlmClient::request_body(const HttpLlmConfig& config, const ChatRequest& request) {
  nlohmann::json body;
  body["model"] = config.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = request.params.temperature;
  body["max_tokens"] = request.params.max_tokens;
  body["stream"] = false;
  return body.dump();
}

LlmReply HttpLlmClient::parse_response(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw LlmError("chat completion response is not JSON", false);
  try {
    LlmReply reply;
    reply.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      reply.prompt_tokens = j["usage"].value("prompt_tokens", 0);
      reply.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    return reply;
  } catch (const nlohmann::json::exception& e) {
    throw LlmError(std::string("unexpected chat completion shape: ") + e.what(), false);
  }
}

LlmReply HttpLlmClient::complete(const ChatRequest& request) {
  SlotGuard slot(slots_);
  Stopwatch sw;

  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::milliseconds(request.params.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto result =
      client.Post(path_prefix_ + "/chat/completions", headers, request_body(config_, request), "application/json");
  if (!result) throw LlmError("chat completion transport error: " + httplib::to_string(result.error()), true);
  if (result->status == 429 || result->status >= 500)
    throw LlmError("chat completion returned HTTP " + std::to_string(result->status), true);
  if (result->status != 200)
    throw LlmError("chat completion returned HTTP " + std::to_string(result->status) + ": " + result->body, false);

  LlmReply reply = parse_response(result->body);
  reply.latency_ms = sw.elapsed_ms();
  return reply;
}

}  // namespace swasr
