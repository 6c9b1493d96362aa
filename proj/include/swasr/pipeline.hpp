#pragma once

#include "swasr/audio.hpp"
#include "swasr/engines.hpp"
#include "swasr/llm.hpp"
#include "swasr/matchers.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swasr {

struct EngineSpec {
  enum class Kind { mock, subprocess };
  Kind kind = Kind::mock;
  std::string id;

  // mock
  double confidence = 0.9;
  /// Build the lookup table from manifest labels (the ground truth).
  bool from_labels = true;
  std::filesystem::path lookup_file;
  CorruptionModel corruption;
  std::uint64_t seed = 0;

  // subprocess
  std::vector<std::string> command;
  int timeout_ms = 30000;
  int pool_size = 1;
};

struct LlmSpec {
  enum class Kind { mock, http };
  Kind kind = Kind::mock;
  std::filesystem::path fixture;  // mock; empty = echo the transcript
  HttpLlmConfig http;
  LlmParams params;
  RetryPolicy retry;
};

struct PipelineConfig {
  MatchMode mode = MatchMode::levenshtein;
  std::string dataset = "dataset";
  std::uint64_t seed = 0;
  FusionConfig fusion;
  PreprocessConfig preprocess;
  std::vector<std::string> vocab;
  std::string context;
  PromptWording wording;
  std::vector<Exemplar> exemplars;
  EngineSpec primary;
  EngineSpec secondary;
  LlmSpec llm;
  Eigen::Index embedding_dim = 256;

  /// Throws ConfigError when mode-specific requirements are missing.
  void validate() const;
};

/// Loads the single JSON config document. Precedence: built-in defaults <
/// file < `key=value` overrides (dotted paths) < LLM_API_KEY for the API key.
/// Relative paths inside the file resolve against the file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
PipelineConfig parse_pipeline_config(std::string_view json_text, const std::filesystem::path& base_dir,
                                     const std::vector<std::string>& overrides = {});

struct ManifestEntry {
  std::string id;
  std::string path;
  std::string label;
  std::string platform;
};

/// JSON-lines {"id", "path", "label", "platform"}. Relative paths resolve
/// against the manifest's directory. Throws ManifestInvalid.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
std::string manifest_to_jsonl(const std::vector<ManifestEntry>& entries);

enum class UtteranceStatus { ok, error };

struct UtteranceResult {
  std::string id;
  std::string label;
  std::string platform;
  std::string dataset;
  MatchMode mode = MatchMode::hybrid_raw;
  UtteranceStatus status = UtteranceStatus::ok;
  std::string error;
  Transcription fused;
  MatchDecision decision;
  /// "load", "preprocess", "transcribe", "verify" (those that ran).
  std::map<std::string, double> stage_latency_ms;
  double total_ms = 0.0;

  double stage_sum_ms() const;
};

/// The verification stage for one mode. Read-only after construction.
class Verifier {
 public:
  /// `vocab` may be empty only for hybrid-raw.
  Verifier(MatchMode mode, const std::vector<std::string>& vocab, std::string context, std::shared_ptr<const EmbeddingProvider> provider,
           PromptTemplate prompt, std::shared_ptr<LlmClient> client, LlmParams params);

  /// Hybrid-raw returns the transcript verbatim; every other mode returns a
  /// vocabulary word.
  MatchDecision verify(std::string_view transcript) const;

  MatchMode mode() const { return mode_; }
  const std::optional<Vocabulary>& vocabulary() const { return vocab_; }

 private:
  MatchMode mode_;
  std::optional<Vocabulary> vocab_;
  std::optional<CosineMatcher> cosine_;
  PromptTemplate prompt_;
  std::shared_ptr<LlmClient> client_;
  LlmParams params_;
};

PromptTemplate prompt_for_mode(MatchMode mode, const std::string& context, const PromptWording& wording,
                               const std::vector<Exemplar>& exemplars);

class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::shared_ptr<EngineAdapter> primary, std::shared_ptr<EngineAdapter> secondary,
           std::shared_ptr<LlmClient> llm);

  /// Preprocess -> hybrid transcription -> verification, each stage timed.
  /// Failures are recorded in the result, never thrown.
  UtteranceResult run_utterance(const AudioClip& clip, const std::string& label = {}) const;

  const PipelineConfig& config() const { return config_; }
  const Verifier& verifier() const { return verifier_; }

 private:
  PipelineConfig config_;
  std::shared_ptr<EngineAdapter> primary_;
  std::shared_ptr<EngineAdapter> secondary_;
  Verifier verifier_;
};

/// Builds engines and the LLM client named in the config. Mock engines with
/// from_labels draw their lookup tables from `manifest`.
std::unique_ptr<Pipeline> build_pipeline(const PipelineConfig& config, const std::vector<ManifestEntry>& manifest);

using ProgressHook = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every entry on a pool of `parallelism` workers. Results come back in
/// manifest order; a failing entry is recorded and does not stop the batch.
std::vector<UtteranceResult> run_manifest(const std::vector<ManifestEntry>& manifest, const Pipeline& pipeline,
                                          int parallelism, const ProgressHook& progress = {});

/// Deterministic fields only (no timings): identical runs give identical bytes.
std::string results_to_jsonl(const std::vector<UtteranceResult>& results);
std::string timings_to_jsonl(const std::vector<UtteranceResult>& results);
/// Reads results (and optionally timings) back; latencies are zero without timings.
std::vector<UtteranceResult> results_from_jsonl(std::string_view results, std::string_view timings = {});

}  // namespace swasr
