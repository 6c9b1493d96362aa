#pragma once

#include "swasr/audio.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace swasr {

struct Transcription {
  std::string text;
  double confidence = 0.0;  // [0, 1]
  std::string engine_id;
  double latency_ms = 0.0;
  /// Only one engine answered (the other failed).
  bool degraded = false;
};

struct FusionConfig {
  double tau = 0.5;
  void validate() const;
};

/// Returns `primary` iff primary.confidence >= secondary.confidence and
/// primary.confidence >= tau, otherwise `secondary`. Latencies are summed.
Transcription fuse_hybrid(const Transcription& primary, const Transcription& secondary, const FusionConfig& config);

struct EngineCapabilities {
  int max_sample_rate = 0;  // 0: unlimited
  bool batch = false;
};

/// One speech recognizer. Implementations must be callable concurrently and
/// must report confidence normalized to [0, 1].
class EngineAdapter {
 public:
  virtual ~EngineAdapter() = default;
  virtual Transcription transcribe(const AudioClip& clip) = 0;
  virtual std::string id() const = 0;
  virtual EngineCapabilities capabilities() const { return {}; }
};

/// Wraps an adapter and throws ContractViolation on out-of-range output.
class ValidatingEngine final : public EngineAdapter {
 public:
  explicit ValidatingEngine(std::shared_ptr<EngineAdapter> inner);
  Transcription transcribe(const AudioClip& clip) override;
  std::string id() const override { return inner_->id(); }
  EngineCapabilities capabilities() const override { return inner_->capabilities(); }

 private:
  std::shared_ptr<EngineAdapter> inner_;
};

// ---------------------------------------------------------------------------
// Mock engine

enum class CorruptionMode {
  char_swap,   // replace one character with a different letter
  char_noise,  // independent per-character substitution/deletion/insertion
  drop,        // empty hypothesis
  confusable,  // a different word from the confusable pool
};

struct CorruptionModel {
  /// Probability that an utterance is corrupted at all.
  double rate = 0.0;
  CorruptionMode mode = CorruptionMode::char_swap;
  /// Per-character edit probability for char_noise.
  double char_rate = 0.1;
  std::vector<std::string> confusables;
  /// Confidence reported for corrupted output is multiplied by this.
  double confidence_scale = 1.0;
};

std::string to_string(CorruptionMode mode);
CorruptionMode parse_corruption_mode(std::string_view text);

struct MockEntry {
  std::string text;
  double confidence = 1.0;
};

/// Table-driven engine. Output is a pure function of (clip id, seed).
class MockEngine final : public EngineAdapter {
 public:
  MockEngine(std::string engine_id, std::map<std::string, MockEntry> lookup, CorruptionModel corruption,
             std::uint64_t seed, std::optional<MockEntry> fallback = std::nullopt);

  Transcription transcribe(const AudioClip& clip) override;
  std::string id() const override { return id_; }

  /// The corruption applied to `text` for a given clip id; exposed for tests.
  std::string corrupt(const std::string& text, const std::string& clip_id, bool* corrupted = nullptr) const;

 private:
  std::string id_;
  std::map<std::string, MockEntry> lookup_;
  CorruptionModel corruption_;
  std::uint64_t seed_;
  std::optional<MockEntry> fallback_;
};

std::shared_ptr<EngineAdapter> make_mock_engine(std::string engine_id, std::map<std::string, MockEntry> lookup,
                                                CorruptionModel corruption, std::uint64_t seed,
                                                std::optional<MockEntry> fallback = std::nullopt);

// ---------------------------------------------------------------------------
// JSON-lines bridge protocol

struct BridgeRequest {
  std::string id;
  std::string audio_path;
  int sample_rate = 0;
};

struct BridgeResponse {
  std::string id;
  std::string text;
  double confidence = 0.0;
  std::optional<std::string> error;
};

struct BridgeHandshake {
  std::string engine;
};

std::string encode_request(const BridgeRequest& request);
/// Throws BridgeProtocolError for anything that is not a well-formed response object.
BridgeResponse decode_response(std::string_view line);
BridgeHandshake decode_handshake(std::string_view line);

struct SubprocessOptions {
  std::vector<std::string> command;
  int timeout_ms = 30000;
  /// Number of child processes; each serves one request at a time.
  int pool_size = 1;
  /// Handshake wait; defaults to timeout_ms when zero.
  int startup_timeout_ms = 0;
};

/// Hosts an external recognizer that speaks the JSON-lines protocol on
/// stdin/stdout. The clip is written to a temporary WAV per request. A child
/// that desyncs, times out or dies is killed and respawned on next use.
class SubprocessEngine final : public EngineAdapter {
 public:
  explicit SubprocessEngine(SubprocessOptions options);
  ~SubprocessEngine() override;
  SubprocessEngine(const SubprocessEngine&) = delete;
  SubprocessEngine& operator=(const SubprocessEngine&) = delete;

  Transcription transcribe(const AudioClip& clip) override;
  std::string id() const override;

  /// Total number of child processes spawned so far (restarts included).
  int spawn_count() const;

 private:
  class Child;

  std::unique_ptr<Child> acquire();
  void release(std::unique_ptr<Child> child);

  SubprocessOptions options_;
  mutable std::mutex mutex_;
  std::condition_variable available_;
  std::vector<std::unique_ptr<Child>> idle_;
  int outstanding_ = 0;
  int spawned_ = 0;
  std::string engine_name_;
  std::uint64_t request_counter_ = 0;
};

std::shared_ptr<EngineAdapter> subprocess_adapter(std::vector<std::string> command, int timeout_ms, int pool_size = 1);

// ---------------------------------------------------------------------------

/// Calls primary then secondary and fuses. If exactly one adapter fails the
/// other's output is returned with degraded = true; if both fail, throws
/// EngineUnavailable.
Transcription transcribe_hybrid(const AudioClip& clip, EngineAdapter& primary, EngineAdapter& secondary,
                                const FusionConfig& config);

}  // namespace swasr
