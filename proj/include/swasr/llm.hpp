#pragma once

#include "swasr/matchers.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace swasr {

struct Message {
  std::string role;  // "system", "user", "assistant"
  std::string content;
  bool operator==(const Message&) const = default;
};

enum class PromptMode { naive, context, context_fewshot };

std::string to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view text);
MatchMode match_mode_for(PromptMode mode);

struct Exemplar {
  std::string transcript;
  std::string context;
  std::vector<std::string> vocab;
  std::string expected;
};

/// Prompt wording. Placeholders: {transcript}, {words}, {context}.
struct PromptWording {
  std::string system =
      "You verify the output of a speech recognizer that was asked to transcribe a single spoken word. "
      "Map the transcription to exactly one word from the list, choosing the most plausible match by "
      "spelling, meaning and pronunciation.";
  std::string user = "Transcription: \"{transcript}\"\nWord list: {words}\nAnswer with exactly one word from the list.";
  std::string context_line = "Context: {context}";
  std::string instructions =
      "The word was spoken in the context given with the request. Consider the meaning, grammar, and "
      "coherence of the context when choosing.";
};

struct PromptTemplate {
  PromptMode mode = PromptMode::naive;
  std::string context;
  PromptWording wording;
  std::vector<Exemplar> exemplars;

  /// Throws TemplateInvalid (context_fewshot requires at least one exemplar).
  void validate() const;
};

/// Pure function of its arguments.
///   naive:           [system, user]
///   context:         system gains the instruction block; user gains the context line (if non-empty)
///   context_fewshot: as context, plus one user/assistant pair per exemplar before the final user turn
std::vector<Message> build_prompt(const PromptTemplate& prompt, std::string_view transcript, const Vocabulary& vocab);

/// Held-out exemplars: JSON-lines {"transcript", "context", "vocab": [...], "expected"}.
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path, std::size_t k);

struct ParsedReply {
  std::string word;
  bool fallback_used = false;
};

/// (1) whole reply fold-matches; (2) first matching whitespace token; (3) projection.
ParsedReply parse_llm_reply(std::string_view reply, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Chat clients

struct LlmParams {
  double temperature = 0.0;
  int max_tokens = 16;
  int timeout_ms = 10000;
};

struct ChatRequest {
  std::vector<Message> messages;
  LlmParams params;
  /// Local metadata for scripted clients; never sent over the wire.
  std::string key;
};

struct LlmReply {
  std::string content;
  double latency_ms = 0.0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int attempts = 1;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// Throws LlmError on failure.
  virtual LlmReply complete(const ChatRequest& request) = 0;
};

/// Replies scripted by request key (the transcript). Unscripted keys get the
/// default reply, or the key itself when no default is set.
class MockLlmClient final : public LlmClient {
 public:
  struct Script {
    std::string reply;
    /// When set the call fails with this message (transient).
    std::optional<std::string> error;
  };

  MockLlmClient() = default;
  explicit MockLlmClient(std::map<std::string, Script> scripts, std::optional<std::string> default_reply = {});
  /// Replies computed by a callback; used for fuzzing.
  explicit MockLlmClient(std::function<std::string(const ChatRequest&)> responder);

  /// Fixture: {"replies": {"<transcript>": "<reply>" | {"error": "..."}}, "default": "..."}.
  static std::shared_ptr<MockLlmClient> load(const std::filesystem::path& path);

  LlmReply complete(const ChatRequest& request) override;
  int calls() const { return calls_.load(); }

 private:
  std::map<std::string, Script> scripts_;
  std::optional<std::string> default_reply_;
  std::function<std::string(const ChatRequest&)> responder_;
  std::atomic<int> calls_{0};
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_backoff_ms = 100;
};

/// Retries transient failures with exponential backoff. The whole call,
/// sleeps included, stays within max_attempts * timeout_ms.
class RetryingLlmClient final : public LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RetryingLlmClient(std::shared_ptr<LlmClient> inner, RetryPolicy policy, Sleeper sleeper = {});
  LlmReply complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<LlmClient> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
};

struct HttpLlmConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model = "llama-4-scout";
  std::string api_key;
  int max_in_flight = 4;
};

/// OpenAI-style chat completion endpoint: POST {base_url}/chat/completions.
/// Timeouts, transport errors, 429 and 5xx are transient; other statuses are not.
class HttpLlmClient final : public LlmClient {
 public:
  explicit HttpLlmClient(HttpLlmConfig config);
  LlmReply complete(const ChatRequest& request) override;

  static std::string request_body(const HttpLlmConfig& config, const ChatRequest& request);
  /// Extracts choices[0].message.content and usage; throws LlmError (non-transient) on bad shape.
  static LlmReply parse_response(std::string_view body);

 private:
  HttpLlmConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<> slots_;
};

// ---------------------------------------------------------------------------

/// build_prompt -> complete -> parse_llm_reply. The decision is always a
/// vocabulary word: on client failure it falls back to match_levenshtein
/// with degraded = true and the error in `note`.
MatchDecision match_llm(std::string_view transcript, const Vocabulary& vocab, const PromptTemplate& prompt,
                        LlmClient& client, const LlmParams& params = {});

}  // namespace swasr
