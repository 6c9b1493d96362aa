#include "swasr/llm.hpp"

#include "swasr/error.hpp"
#include "swasr/text.hpp"
#include "swasr/timing.hpp"

#include <json.hpp>

#include <fstream>
#include <thread>

namespace swasr {
namespace {

std::string join(const std::vector<std::string>& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

/// Single pass, so placeholder-like text inside substituted values stays literal.
std::string render(std::string_view pattern, const std::map<std::string_view, std::string_view>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      const auto close = pattern.find('}', i);
      if (close != std::string_view::npos) {
        const auto it = values.find(pattern.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += pattern[i++];
  }
  return out;
}

std::string user_turn(const PromptWording& wording, bool with_context, std::string_view context,
                      std::string_view transcript, const std::string& words) {
  std::string turn;
  if (with_context && !context.empty()) {
    turn = render(wording.context_line, {{"context", context}});
    turn += '\n';
  }
  turn += render(wording.user, {{"transcript", transcript}, {"words", words}, {"context", context}});
  return turn;
}

}  // namespace

std::string to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::naive: return "naive";
    case PromptMode::context: return "context";
    case PromptMode::context_fewshot: return "context_fewshot";
  }
  return "unknown";
}

PromptMode parse_prompt_mode(std::string_view text) {
  for (auto m : {PromptMode::naive, PromptMode::context, PromptMode::context_fewshot})
    if (text == to_string(m)) return m;
  throw ConfigError("unknown prompt mode '" + std::string(text) + "'");
}

MatchMode match_mode_for(PromptMode mode) {
  switch (mode) {
    case PromptMode::naive: return MatchMode::llm;
    case PromptMode::context: return MatchMode::llm_context;
    case PromptMode::context_fewshot: return MatchMode::llm_context_fewshot;
  }
  return MatchMode::llm;
}

void PromptTemplate::validate() const {
  if (mode == PromptMode::context_fewshot && exemplars.empty())
    throw TemplateInvalid("few-shot prompting needs at least one exemplar");
}

std::vector<Message> build_prompt(const PromptTemplate& prompt, std::string_view transcript, const Vocabulary& vocab) {
  prompt.validate();
  const bool contextual = prompt.mode != PromptMode::naive;

  std::vector<Message> messages;
  std::string system = prompt.wording.system;
  if (contextual) {
    system += "\n\n";
    system += prompt.wording.instructions;
  }
  messages.push_back({"system", std::move(system)});

  if (prompt.mode == PromptMode::context_fewshot) {
    for (const auto& ex : prompt.exemplars) {
      messages.push_back({"user", user_turn(prompt.wording, true, ex.context, ex.transcript, join(ex.vocab, ", "))});
      messages.push_back({"assistant", ex.expected});
    }
  }
  messages.push_back({"user", user_turn(prompt.wording, contextual, prompt.context, transcript, join(vocab.words(), ", "))});
  return messages;
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path, std::size_t k) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open exemplar file " + path.string());
  std::vector<Exemplar> out;
  std::string line;
  std::size_t line_no = 0;
  while (out.size() < k && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Exemplar ex;
      ex.transcript = j.at("transcript").get<std::string>();
      ex.context = j.value("context", std::string{});
      ex.vocab = j.at("vocab").get<std::vector<std::string>>();
      ex.expected = j.at("expected").get<std::string>();
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

ParsedReply parse_llm_reply(std::string_view reply, const Vocabulary& vocab) {
  const std::string folded = fold_trim(reply);
  if (auto i = vocab.find(folded)) return {vocab[*i], false};
  for (const auto& token : split_whitespace(folded)) {
    if (auto i = vocab.find(strip_punctuation(token))) return {vocab[*i], false};
  }
  return {project_to_vocab(folded, vocab), true};
}

// ---------------------------------------------------------------------------

MockLlmClient::MockLlmClient(std::map<std::string, Script> scripts, std::optional<std::string> default_reply)
    : scripts_(std::move(scripts)), default_reply_(std::move(default_reply)) {}

MockLlmClient::MockLlmClient(std::function<std::string(const ChatRequest&)> responder)
    : responder_(std::move(responder)) {}

std::shared_ptr<MockLlmClient> MockLlmClient::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open LLM fixture " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    std::map<std::string, Script> scripts;
    if (j.contains("replies")) {
      for (const auto& [key, value] : j.at("replies").items()) {
        Script s;
        if (value.is_string()) {
          s.reply = value.get<std::string>();
        } else {
          s.error = value.at("error").get<std::string>();
        }
        scripts.emplace(key, std::move(s));
      }
    }
    std::optional<std::string> fallback;
    if (j.contains("default") && !j["default"].is_null()) fallback = j["default"].get<std::string>();
    return std::make_shared<MockLlmClient>(std::move(scripts), std::move(fallback));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid LLM fixture " + path.string() + ": " + e.what());
  }
}

LlmReply MockLlmClient::complete(const ChatRequest& request) {
  ++calls_;
  LlmReply reply;
  if (responder_) {
    reply.content = responder_(request);
    return reply;
  }
  if (const auto it = scripts_.find(request.key); it != scripts_.end()) {
    if (it->second.error) throw LlmError(*it->second.error, true);
    reply.content = it->second.reply;
  } else {
    reply.content = default_reply_.value_or(request.key);
  }
  return reply;
}

RetryingLlmClient::RetryingLlmClient(std::shared_ptr<LlmClient> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!inner_) throw InvalidArgument("RetryingLlmClient needs a client");
  if (policy_.max_attempts < 1) throw InvalidArgument("max_attempts must be at least 1");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

LlmReply RetryingLlmClient::complete(const ChatRequest& request) {
  Stopwatch sw;
  const double budget_ms = double(policy_.max_attempts) * request.params.timeout_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      LlmReply reply = inner_->complete(request);
      reply.attempts = attempt;
      reply.latency_ms = sw.elapsed_ms();
      return reply;
    } catch (const LlmError& e) {
      if (!e.transient() || attempt >= policy_.max_attempts) {
        throw LlmError(std::string(e.what()) + " (after " + std::to_string(attempt) + " attempt(s))", e.transient());
      }
      const double backoff = double(policy_.base_backoff_ms) * double(1 << (attempt - 1));
      const double remaining = budget_ms - sw.elapsed_ms();
      if (remaining <= 0.0) throw LlmError(std::string(e.what()) + " (retry budget exhausted)", true);
      sleeper_(std::chrono::milliseconds(static_cast<long long>(std::min(backoff, remaining))));
    }
  }
}

// ---------------------------------------------------------------------------

MatchDecision match_llm(std::string_view transcript, const Vocabulary& vocab, const PromptTemplate& prompt,
                        LlmClient& client, const LlmParams& params) {
  Stopwatch sw;
  ChatRequest request{build_prompt(prompt, transcript, vocab), params, std::string(transcript)};
  MatchDecision decision;
  try {
    const LlmReply reply = client.complete(request);
    const ParsedReply parsed = parse_llm_reply(reply.content, vocab);
    decision.word = parsed.word;
    decision.fallback_used = parsed.fallback_used;
    decision.score = parsed.fallback_used ? 0.0 : 1.0;
  } catch (const LlmError& e) {
    decision = match_levenshtein(transcript, vocab);
    decision.score = 0.0;
    decision.fallback_used = true;
    decision.degraded = true;
    decision.note = std::string("llm unavailable: ") + e.what();
  }
  decision.mode = match_mode_for(prompt.mode);
  decision.raw_transcript = std::string(transcript);
  decision.latency_ms = sw.elapsed_ms();
  return decision;
}

}  // namespace swasr
