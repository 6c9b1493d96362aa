#include "swasr/pipeline.hpp"

#include "swasr/error.hpp"
#include "swasr/random.hpp"
#include "swasr/text.hpp"
#include "swasr/timing.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace swasr {
namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("bad override key: " + key);
    if (!node->is_object()) throw ConfigError("override path crosses a non-object: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

CorruptionModel parse_corruption(const json& j) {
  check_keys(j, "corruption", {"rate", "mode", "char_rate", "confusables", "confidence_scale"});
  CorruptionModel c;
  c.rate = j.value("rate", c.rate);
  if (j.contains("mode")) c.mode = parse_corruption_mode(j.at("mode").get<std::string>());
  c.char_rate = j.value("char_rate", c.char_rate);
  if (j.contains("confusables")) c.confusables = j.at("confusables").get<std::vector<std::string>>();
  c.confidence_scale = j.value("confidence_scale", c.confidence_scale);
  return c;
}

EngineSpec parse_engine(const json& j, const std::string& where, EngineSpec spec, const std::filesystem::path& base) {
  check_keys(j, where,
             {"type", "id", "confidence", "from_labels", "lookup_file", "corruption", "seed", "command", "timeout_ms",
              "pool"});
  const std::string type = j.value("type", std::string("mock"));
  if (type == "mock") {
    spec.kind = EngineSpec::Kind::mock;
  } else if (type == "subprocess") {
    spec.kind = EngineSpec::Kind::subprocess;
  } else {
    throw ConfigError(where + ".type must be 'mock' or 'subprocess'");
  }
  spec.id = j.value("id", spec.id);
  spec.confidence = j.value("confidence", spec.confidence);
  spec.from_labels = j.value("from_labels", spec.from_labels);
  if (j.contains("lookup_file")) {
    spec.lookup_file = resolve(base, j.at("lookup_file").get<std::string>());
    if (!j.contains("from_labels")) spec.from_labels = false;
  }
  if (j.contains("corruption")) spec.corruption = parse_corruption(j.at("corruption"));
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("command")) spec.command = j.at("command").get<std::vector<std::string>>();
  spec.timeout_ms = j.value("timeout_ms", spec.timeout_ms);
  spec.pool_size = j.value("pool", spec.pool_size);
  return spec;
}

std::map<std::string, MockEntry> load_lookup(const std::filesystem::path& path) {
  const json j = json::parse(read_text(path, "mock lookup"), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("mock lookup must be a JSON object: " + path.string());
  std::map<std::string, MockEntry> lookup;
  for (const auto& [id, entry] : j.items()) {
    lookup[id] = MockEntry{entry.at("text").get<std::string>(), entry.value("confidence", 1.0)};
  }
  return lookup;
}

std::shared_ptr<EngineAdapter> make_engine(const EngineSpec& spec, std::uint64_t run_seed,
                                           const std::vector<ManifestEntry>& manifest) {
  if (spec.kind == EngineSpec::Kind::subprocess) return subprocess_adapter(spec.command, spec.timeout_ms, spec.pool_size);

  std::map<std::string, MockEntry> lookup;
  if (!spec.lookup_file.empty()) lookup = load_lookup(spec.lookup_file);
  if (spec.from_labels) {
    for (const auto& e : manifest) lookup.try_emplace(e.id, MockEntry{e.label, spec.confidence});
  }
  const std::uint64_t seed = splitmix64(run_seed) ^ spec.seed;
  return std::make_shared<ValidatingEngine>(make_mock_engine(spec.id, std::move(lookup), spec.corruption, seed));
}

json transcription_json(const Transcription& t) {
  return {{"text", t.text}, {"confidence", t.confidence}, {"engine", t.engine_id}, {"degraded", t.degraded}};
}

json decision_json(const MatchDecision& d) {
  json j = {{"word", d.word},
            {"score", d.score},
            {"mode", mode_name(d.mode)},
            {"raw_transcript", d.raw_transcript},
            {"fallback_used", d.fallback_used},
            {"degraded", d.degraded}};
  if (!d.note.empty()) j["note"] = d.note;
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void PipelineConfig::validate() const {
  fusion.validate();
  preprocess.validate();
  if (mode != MatchMode::hybrid_raw && vocab.empty()) throw ConfigError("mode " + mode_label(mode) + " needs a vocabulary");
  if (mode == MatchMode::llm_context_fewshot && exemplars.empty())
    throw ConfigError("mode LLM+C+FS needs prompt.exemplars_file with at least one exemplar");
  for (const auto* spec : {&primary, &secondary}) {
    if (spec->kind == EngineSpec::Kind::subprocess && spec->command.empty())
      throw ConfigError("subprocess engine '" + spec->id + "' needs a command");
    if (spec->kind == EngineSpec::Kind::mock && !(spec->confidence >= 0.0 && spec->confidence <= 1.0))
      throw ConfigError("mock engine confidence must lie in [0, 1]");
  }
  if (is_llm_mode(mode) && llm.kind == LlmSpec::Kind::http && llm.http.base_url.empty())
    throw ConfigError("LLM modes need llm.base_url for the http client");
  if (embedding_dim <= 0) throw ConfigError("embedding.dim must be positive");
}

PipelineConfig parse_pipeline_config(std::string_view json_text, const std::filesystem::path& base_dir,
                                     const std::vector<std::string>& overrides) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);

  PipelineConfig cfg;
  cfg.primary.id = "whisper";
  cfg.primary.confidence = 0.9;
  cfg.secondary.id = "vosk";
  cfg.secondary.confidence = 0.8;
  cfg.secondary.seed = 1;

  try {
    check_keys(doc, "config",
               {"mode", "dataset", "seed", "vocab", "vocab_file", "context", "fusion", "preprocess", "engines", "prompt",
                "llm", "embedding"});
    if (doc.contains("mode")) cfg.mode = parse_mode(doc.at("mode").get<std::string>());
    cfg.dataset = doc.value("dataset", cfg.dataset);
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("vocab")) cfg.vocab = doc.at("vocab").get<std::vector<std::string>>();
    if (doc.contains("vocab_file")) cfg.vocab = Vocabulary::load(resolve(base_dir, doc.at("vocab_file").get<std::string>())).words();
    cfg.context = doc.value("context", cfg.context);

    if (doc.contains("fusion")) {
      const auto& f = doc.at("fusion");
      check_keys(f, "fusion", {"tau"});
      cfg.fusion.tau = f.value("tau", cfg.fusion.tau);
    }
    if (doc.contains("preprocess")) {
      const auto& p = doc.at("preprocess");
      check_keys(p, "preprocess",
                 {"denoise", "normalize", "gate_threshold_db", "target_rms_dbfs", "frame_ms", "hop_ms",
                  "noise_percentile", "attenuation_db"});
      auto& pp = cfg.preprocess;
      pp.denoise_enabled = p.value("denoise", pp.denoise_enabled);
      pp.normalize_enabled = p.value("normalize", pp.normalize_enabled);
      pp.gate_threshold_db = p.value("gate_threshold_db", pp.gate_threshold_db);
      pp.target_rms_dbfs = p.value("target_rms_dbfs", pp.target_rms_dbfs);
      pp.frame_ms = p.value("frame_ms", pp.frame_ms);
      pp.hop_ms = p.value("hop_ms", pp.hop_ms);
      pp.noise_percentile = p.value("noise_percentile", pp.noise_percentile);
      pp.attenuation_db = p.value("attenuation_db", pp.attenuation_db);
    }
    if (doc.contains("engines")) {
      const auto& e = doc.at("engines");
      check_keys(e, "engines", {"primary", "secondary"});
      if (e.contains("primary")) cfg.primary = parse_engine(e.at("primary"), "engines.primary", cfg.primary, base_dir);
      if (e.contains("secondary"))
        cfg.secondary = parse_engine(e.at("secondary"), "engines.secondary", cfg.secondary, base_dir);
    }
    if (doc.contains("prompt")) {
      const auto& p = doc.at("prompt");
      check_keys(p, "prompt", {"system", "user", "context_line", "instructions", "exemplars_file", "k"});
      cfg.wording.system = p.value("system", cfg.wording.system);
      cfg.wording.user = p.value("user", cfg.wording.user);
      cfg.wording.context_line = p.value("context_line", cfg.wording.context_line);
      cfg.wording.instructions = p.value("instructions", cfg.wording.instructions);
      if (p.contains("exemplars_file")) {
        const auto k = p.value("k", std::size_t{5});
        cfg.exemplars = load_exemplars(resolve(base_dir, p.at("exemplars_file").get<std::string>()), k);
      }
    }
    if (doc.contains("llm")) {
      const auto& l = doc.at("llm");
      check_keys(l, "llm",
                 {"type", "fixture", "base_url", "model", "api_key", "max_in_flight", "timeout_ms", "temperature",
                  "max_tokens", "max_attempts", "backoff_ms"});
      const std::string type = l.value("type", std::string("mock"));
      if (type == "mock") {
        cfg.llm.kind = LlmSpec::Kind::mock;
      } else if (type == "http") {
        cfg.llm.kind = LlmSpec::Kind::http;
      } else {
        throw ConfigError("llm.type must be 'mock' or 'http'");
      }
      if (l.contains("fixture")) cfg.llm.fixture = resolve(base_dir, l.at("fixture").get<std::string>());
      cfg.llm.http.base_url = l.value("base_url", cfg.llm.http.base_url);
      cfg.llm.http.model = l.value("model", cfg.llm.http.model);
      cfg.llm.http.api_key = l.value("api_key", cfg.llm.http.api_key);
      cfg.llm.http.max_in_flight = l.value("max_in_flight", cfg.llm.http.max_in_flight);
      cfg.llm.params.timeout_ms = l.value("timeout_ms", cfg.llm.params.timeout_ms);
      cfg.llm.params.temperature = l.value("temperature", cfg.llm.params.temperature);
      cfg.llm.params.max_tokens = l.value("max_tokens", cfg.llm.params.max_tokens);
      cfg.llm.retry.max_attempts = l.value("max_attempts", cfg.llm.retry.max_attempts);
      cfg.llm.retry.base_backoff_ms = l.value("backoff_ms", cfg.llm.retry.base_backoff_ms);
    }
    if (doc.contains("embedding")) {
      const auto& e = doc.at("embedding");
      check_keys(e, "embedding", {"dim"});
      cfg.embedding_dim = e.value("dim", cfg.embedding_dim);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const VocabularyError& e) {
    throw ConfigError(std::string("invalid vocabulary: ") + e.what());
  }

  if (const char* key = std::getenv("LLM_API_KEY"); key != nullptr && *key != '\0') cfg.llm.http.api_key = key;
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = read_text(path, "config");
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_pipeline_config(text, path.parent_path(), overrides);
}

// ---------------------------------------------------------------------------
// Manifest

std::vector<ManifestEntry> parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    const std::string where = "manifest line " + std::to_string(line_no);
    if (j.is_discarded() || !j.is_object()) throw ManifestInvalid(where + " is not a JSON object");
    ManifestEntry e;
    try {
      e.id = j.at("id").get<std::string>();
      e.path = resolve(base_dir, j.at("path").get<std::string>()).string();
      e.label = j.at("label").get<std::string>();
      e.platform = j.value("platform", std::string{});
    } catch (const json::exception& ex) {
      throw ManifestInvalid(where + ": " + ex.what());
    }
    if (e.id.empty()) throw ManifestInvalid(where + ": empty id");
    if (!seen.insert(e.id).second) throw ManifestInvalid(where + ": duplicate id '" + e.id + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestInvalid("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

std::string manifest_to_jsonl(const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += json{{"id", e.id}, {"path", e.path}, {"label", e.label}, {"platform", e.platform}}.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Verification and orchestration

double UtteranceResult::stage_sum_ms() const {
  double sum = 0.0;
  for (const auto& [_, ms] : stage_latency_ms) sum += ms;
  return sum;
}

PromptTemplate prompt_for_mode(MatchMode mode, const std::string& context, const PromptWording& wording,
                               const std::vector<Exemplar>& exemplars) {
  PromptTemplate prompt;
  prompt.wording = wording;
  switch (mode) {
    case MatchMode::llm_context:
      prompt.mode = PromptMode::context;
      prompt.context = context;
      break;
    case MatchMode::llm_context_fewshot:
      prompt.mode = PromptMode::context_fewshot;
      prompt.context = context;
      prompt.exemplars = exemplars;
      break;
    default:
      prompt.mode = PromptMode::naive;
      break;
  }
  return prompt;
}

Verifier::Verifier(MatchMode mode, const std::vector<std::string>& vocab, std::string context,
                   std::shared_ptr<const EmbeddingProvider> provider, PromptTemplate prompt,
                   std::shared_ptr<LlmClient> client, LlmParams params)
    : mode_(mode), prompt_(std::move(prompt)), client_(std::move(client)), params_(params) {
  if (mode_ == MatchMode::hybrid_raw) {
    if (!vocab.empty()) vocab_.emplace(vocab);
    return;
  }
  vocab_.emplace(vocab);
  if (mode_ == MatchMode::cosine || mode_ == MatchMode::cosine_context) {
    if (!provider) throw InvalidArgument("cosine modes need an embedding provider");
    cosine_.emplace(*vocab_, std::move(provider), mode_ == MatchMode::cosine_context ? std::move(context) : std::string{});
  }
  if (is_llm_mode(mode_)) {
    if (!client_) throw InvalidArgument("LLM modes need a client");
    prompt_.validate();
  }
}

MatchDecision Verifier::verify(std::string_view transcript) const {
  switch (mode_) {
    case MatchMode::hybrid_raw: {
      MatchDecision d;
      d.word = std::string(transcript);
      d.raw_transcript = std::string(transcript);
      d.mode = MatchMode::hybrid_raw;
      return d;
    }
    case MatchMode::levenshtein:
      return match_levenshtein(transcript, *vocab_);
    case MatchMode::cosine:
    case MatchMode::cosine_context: {
      auto d = cosine_->match(transcript);
      d.mode = mode_;
      return d;
    }
    case MatchMode::llm:
    case MatchMode::llm_context:
    case MatchMode::llm_context_fewshot:
      return match_llm(transcript, *vocab_, prompt_, *client_, params_);
  }
  throw InvalidArgument("unhandled mode");
}

namespace {

std::shared_ptr<LlmClient> make_llm_client(const PipelineConfig& config) {
  if (!is_llm_mode(config.mode)) return nullptr;
  if (config.llm.kind == LlmSpec::Kind::mock) {
    if (config.llm.fixture.empty()) return std::make_shared<MockLlmClient>();
    return MockLlmClient::load(config.llm.fixture);
  }
  return std::make_shared<RetryingLlmClient>(std::make_shared<HttpLlmClient>(config.llm.http), config.llm.retry);
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<EngineAdapter> primary,
                   std::shared_ptr<EngineAdapter> secondary, std::shared_ptr<LlmClient> llm)
    : config_(std::move(config)),
      primary_(std::move(primary)),
      secondary_(std::move(secondary)),
      verifier_(config_.mode, config_.vocab, config_.context,
                std::make_shared<CharNgramEmbedder>(config_.embedding_dim),
                prompt_for_mode(config_.mode, config_.context, config_.wording, config_.exemplars), std::move(llm),
                config_.llm.params) {
  if (!primary_ || !secondary_) throw InvalidArgument("pipeline needs two engines");
}

UtteranceResult Pipeline::run_utterance(const AudioClip& clip, const std::string& label) const {
  Stopwatch total;
  UtteranceResult result;
  result.id = clip.id;
  result.label = label;
  result.dataset = config_.dataset;
  result.mode = config_.mode;
  try {
    Stopwatch stage;
    const PreprocessResult pre = preprocess(clip, config_.preprocess);
    result.stage_latency_ms["preprocess"] = stage.elapsed_ms();

    stage.reset();
    result.fused = transcribe_hybrid(pre.clip, *primary_, *secondary_, config_.fusion);
    result.stage_latency_ms["transcribe"] = stage.elapsed_ms();

    stage.reset();
    result.decision = verifier_.verify(result.fused.text);
    if (config_.mode == MatchMode::hybrid_raw) result.decision.score = result.fused.confidence;
    result.stage_latency_ms["verify"] = stage.elapsed_ms();
  } catch (const Error& e) {
    result.status = UtteranceStatus::error;
    result.error = e.what();
  }
  result.total_ms = total.elapsed_ms();
  return result;
}

std::unique_ptr<Pipeline> build_pipeline(const PipelineConfig& config, const std::vector<ManifestEntry>& manifest) {
  config.validate();
  return std::make_unique<Pipeline>(config, make_engine(config.primary, config.seed, manifest),
                                    make_engine(config.secondary, config.seed, manifest), make_llm_client(config));
}

std::vector<UtteranceResult> run_manifest(const std::vector<ManifestEntry>& manifest, const Pipeline& pipeline,
                                          int parallelism, const ProgressHook& progress) {
  std::vector<UtteranceResult> results(manifest.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      const ManifestEntry& entry = manifest[i];
      Stopwatch total;
      UtteranceResult r;
      try {
        Stopwatch load;
        AudioClip clip = load_wav(entry.path);
        const double load_ms = load.elapsed_ms();
        clip.id = entry.id;
        r = pipeline.run_utterance(clip, entry.label);
        r.stage_latency_ms["load"] = load_ms;
      } catch (const Error& e) {
        r.id = entry.id;
        r.label = entry.label;
        r.dataset = pipeline.config().dataset;
        r.mode = pipeline.config().mode;
        r.status = UtteranceStatus::error;
        r.error = e.what();
      }
      r.platform = entry.platform;
      r.total_ms = total.elapsed_ms();
      results[i] = std::move(r);

      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, manifest.size());
      }
    }
  };

  const auto workers = static_cast<std::size_t>(std::max(1, parallelism));
  if (workers == 1 || manifest.size() <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, manifest.size()); ++w) pool.emplace_back(worker);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Serialization

std::string results_to_jsonl(const std::vector<UtteranceResult>& results) {
  std::string out;
  for (const auto& r : results) {
    json j = {{"id", r.id},
              {"label", r.label},
              {"platform", r.platform},
              {"dataset", r.dataset},
              {"mode", mode_label(r.mode)},
              {"status", r.status == UtteranceStatus::ok ? "ok" : "error"}};
    if (r.status == UtteranceStatus::ok) {
      j["fused"] = transcription_json(r.fused);
      j["decision"] = decision_json(r.decision);
    } else {
      j["error"] = r.error;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string timings_to_jsonl(const std::vector<UtteranceResult>& results) {
  std::string out;
  for (const auto& r : results) {
    json stages = json::object();
    for (const auto& [stage, ms] : r.stage_latency_ms) stages[stage] = ms;
    out += json{{"id", r.id}, {"stages_ms", stages}, {"total_ms", r.total_ms}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<UtteranceResult> results_from_jsonl(std::string_view results, std::string_view timings) {
  std::map<std::string, json> timing_by_id;
  {
    std::istringstream in{std::string(timings)};
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string())
        throw ManifestInvalid("bad timings line: " + line);
      const std::string id = j["id"].get<std::string>();
      timing_by_id[id] = std::move(j);
    }
  }

  std::vector<UtteranceResult> out;
  std::istringstream in{std::string(results)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ManifestInvalid("bad results line: " + line);
    try {
      UtteranceResult r;
      r.id = j.at("id").get<std::string>();
      r.label = j.value("label", std::string{});
      r.platform = j.value("platform", std::string{});
      r.dataset = j.value("dataset", std::string{});
      r.mode = parse_mode(j.at("mode").get<std::string>());
      r.status = j.value("status", std::string("ok")) == "ok" ? UtteranceStatus::ok : UtteranceStatus::error;
      r.error = j.value("error", std::string{});
      if (j.contains("fused")) {
        const auto& f = j["fused"];
        r.fused = Transcription{f.value("text", std::string{}), f.value("confidence", 0.0),
                                f.value("engine", std::string{}), 0.0, f.value("degraded", false)};
      }
      if (j.contains("decision")) {
        const auto& d = j["decision"];
        r.decision.word = d.value("word", std::string{});
        r.decision.score = d.value("score", 0.0);
        r.decision.mode = parse_mode(d.value("mode", mode_name(r.mode)));
        r.decision.raw_transcript = d.value("raw_transcript", std::string{});
        r.decision.fallback_used = d.value("fallback_used", false);
        r.decision.degraded = d.value("degraded", false);
        r.decision.note = d.value("note", std::string{});
      }
      if (const auto it = timing_by_id.find(r.id); it != timing_by_id.end()) {
        for (const auto& [stage, ms] : it->second.at("stages_ms").items()) r.stage_latency_ms[stage] = ms.get<double>();
        r.total_ms = it->second.value("total_ms", 0.0);
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ManifestInvalid(std::string("bad results line: ") + e.what());
    }
  }
  return out;
}

}  // namespace swasr
