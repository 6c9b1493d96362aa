#include "swasr/engines.hpp"

#include "swasr/error.hpp"
#include "swasr/random.hpp"
#include "swasr/text.hpp"
#include "swasr/timing.hpp"

#include <json.hpp>

#include <cmath>
#include <random>

namespace swasr {
namespace {

constexpr std::u32string_view kLetters = U"abcdefghijklmnopqrstuvwxyz";

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

char32_t different_letter(char32_t original, std::uint64_t draw) {
  char32_t c = kLetters[draw % kLetters.size()];
  if (c == original) c = kLetters[(draw + 1) % kLetters.size()];
  return c;
}

}  // namespace

void FusionConfig::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0, 1]");
}

Transcription fuse_hybrid(const Transcription& primary, const Transcription& secondary, const FusionConfig& config) {
  const bool take_primary = primary.confidence >= secondary.confidence && primary.confidence >= config.tau;
  Transcription fused = take_primary ? primary : secondary;
  fused.latency_ms = primary.latency_ms + secondary.latency_ms;
  fused.degraded = false;
  return fused;
}

ValidatingEngine::ValidatingEngine(std::shared_ptr<EngineAdapter> inner) : inner_(std::move(inner)) {
  if (!inner_) throw InvalidArgument("ValidatingEngine needs an adapter");
}

Transcription ValidatingEngine::transcribe(const AudioClip& clip) {
  Transcription t = inner_->transcribe(clip);
  if (!(t.confidence >= 0.0 && t.confidence <= 1.0))
    throw ContractViolation("engine '" + inner_->id() + "' returned confidence " + std::to_string(t.confidence));
  if (!(t.latency_ms >= 0.0)) throw ContractViolation("engine '" + inner_->id() + "' returned negative latency");
  return t;
}

// ---------------------------------------------------------------------------

std::string to_string(CorruptionMode mode) {
  switch (mode) {
    case CorruptionMode::char_swap: return "char_swap";
    case CorruptionMode::char_noise: return "char_noise";
    case CorruptionMode::drop: return "drop";
    case CorruptionMode::confusable: return "confusable";
  }
  return "unknown";
}

CorruptionMode parse_corruption_mode(std::string_view text) {
  for (auto m : {CorruptionMode::char_swap, CorruptionMode::char_noise, CorruptionMode::drop, CorruptionMode::confusable})
    if (text == to_string(m)) return m;
  if (text == "char-swap") return CorruptionMode::char_swap;
  if (text == "char-noise") return CorruptionMode::char_noise;
  throw ConfigError("unknown corruption mode '" + std::string(text) + "'");
}

MockEngine::MockEngine(std::string engine_id, std::map<std::string, MockEntry> lookup, CorruptionModel corruption,
                       std::uint64_t seed, std::optional<MockEntry> fallback)
    : id_(std::move(engine_id)),
      lookup_(std::move(lookup)),
      corruption_(std::move(corruption)),
      seed_(seed),
      fallback_(std::move(fallback)) {
  if (!(corruption_.rate >= 0.0 && corruption_.rate <= 1.0)) throw InvalidArgument("corruption rate must lie in [0, 1]");
  if (!(corruption_.char_rate >= 0.0 && corruption_.char_rate <= 1.0))
    throw InvalidArgument("char_rate must lie in [0, 1]");
}

std::string MockEngine::corrupt(const std::string& text, const std::string& clip_id, bool* corrupted) const {
  std::mt19937_64 rng(mix_seed(seed_, clip_id));
  const bool hit = uniform01(rng) < corruption_.rate;
  if (corrupted) *corrupted = false;
  if (!hit) return text;

  const std::u32string original = to_code_points(text);
  std::u32string out;
  auto swap_one = [&] {
    out = original;
    if (out.empty()) {
      out.push_back(kLetters[rng() % kLetters.size()]);
      return;
    }
    const std::size_t pos = rng() % out.size();
    out[pos] = different_letter(out[pos], rng());
  };

  switch (corruption_.mode) {
    case CorruptionMode::char_swap:
      swap_one();
      break;
    case CorruptionMode::char_noise:
      // Fixed number of draws per character, so raising char_rate only ever
      // adds edits for a given seed.
      for (char32_t c : original) {
        const double edit = uniform01(rng);
        const double kind = uniform01(rng);
        const std::uint64_t letter = rng();
        if (edit >= corruption_.char_rate) {
          out.push_back(c);
        } else if (kind < 1.0 / 3.0) {
          out.push_back(different_letter(c, letter));
        } else if (kind < 2.0 / 3.0) {
          // deletion
        } else {
          out.push_back(c);
          out.push_back(kLetters[letter % kLetters.size()]);
        }
      }
      break;
    case CorruptionMode::drop:
      break;
    case CorruptionMode::confusable: {
      std::vector<const std::string*> pool;
      const std::string folded = fold_trim(text);
      for (const auto& w : corruption_.confusables)
        if (fold_trim(w) != folded) pool.push_back(&w);
      if (pool.empty()) {
        swap_one();
      } else {
        out = to_code_points(*pool[rng() % pool.size()]);
      }
      break;
    }
  }
  std::string result = to_utf8(out);
  if (corrupted) *corrupted = result != text;
  return result;
}

Transcription MockEngine::transcribe(const AudioClip& clip) {
  Stopwatch sw;
  const auto it = lookup_.find(clip.id);
  if (it == lookup_.end() && !fallback_) throw UnknownClip("mock engine '" + id_ + "' has no entry for '" + clip.id + "'");
  const MockEntry& entry = it != lookup_.end() ? it->second : *fallback_;

  bool corrupted = false;
  Transcription t;
  t.text = corrupt(entry.text, clip.id, &corrupted);
  t.confidence = std::clamp(corrupted ? entry.confidence * corruption_.confidence_scale : entry.confidence, 0.0, 1.0);
  t.engine_id = id_;
  t.latency_ms = sw.elapsed_ms();
  return t;
}

std::shared_ptr<EngineAdapter> make_mock_engine(std::string engine_id, std::map<std::string, MockEntry> lookup,
                                                CorruptionModel corruption, std::uint64_t seed,
                                                std::optional<MockEntry> fallback) {
  return std::make_shared<MockEngine>(std::move(engine_id), std::move(lookup), std::move(corruption), seed,
                                      std::move(fallback));
}

// ---------------------------------------------------------------------------

std::string encode_request(const BridgeRequest& request) {
  nlohmann::json j;
  j["id"] = request.id;
  j["audio_path"] = request.audio_path;
  j["sample_rate"] = request.sample_rate;
  return j.dump();
}

BridgeResponse decode_response(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BridgeProtocolError("bridge sent a non-JSON-object line");
  if (!j.contains("id") || !j["id"].is_string()) throw BridgeProtocolError("bridge response lacks a string id");

  BridgeResponse r;
  r.id = j["id"].get<std::string>();
  if (j.contains("error") && !j["error"].is_null()) {
    if (!j["error"].is_string()) throw BridgeProtocolError("bridge error field must be a string");
    r.error = j["error"].get<std::string>();
  }
  const bool has_text = j.contains("text") && j["text"].is_string();
  const bool has_conf = j.contains("confidence") && j["confidence"].is_number();
  if (!r.error && (!has_text || !has_conf)) throw BridgeProtocolError("bridge response lacks text/confidence");
  if (has_text) r.text = j["text"].get<std::string>();
  if (has_conf) {
    r.confidence = j["confidence"].get<double>();
    if (!std::isfinite(r.confidence)) throw BridgeProtocolError("bridge confidence is not finite");
  }
  return r;
}

BridgeHandshake decode_handshake(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("ready") || j["ready"] != true)
    throw BridgeProtocolError("bridge did not send a ready handshake");
  BridgeHandshake h;
  if (j.contains("engine") && j["engine"].is_string()) h.engine = j["engine"].get<std::string>();
  return h;
}

// ---------------------------------------------------------------------------

Transcription transcribe_hybrid(const AudioClip& clip, EngineAdapter& primary, EngineAdapter& secondary,
                                const FusionConfig& config) {
  std::optional<Transcription> first;
  std::optional<Transcription> second;
  std::string errors;
  try {
    first = primary.transcribe(clip);
  } catch (const Error& e) {
    errors += primary.id() + ": " + e.what();
  }
  try {
    second = secondary.transcribe(clip);
  } catch (const Error& e) {
    if (!errors.empty()) errors += "; ";
    errors += secondary.id() + ": " + e.what();
  }
  if (first && second) return fuse_hybrid(*first, *second, config);
  if (!first && !second) throw EngineUnavailable("both engines failed: " + errors);
  Transcription survivor = first ? *first : *second;
  survivor.degraded = true;
  return survivor;
}

}  // namespace swasr
