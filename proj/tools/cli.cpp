#include "cli.hpp"

#include "swasr/audio.hpp"
#include "swasr/channel.hpp"
#include "swasr/dispatch.hpp"
#include "swasr/error.hpp"
#include "swasr/eval.hpp"
#include "swasr/experiment.hpp"
#include "swasr/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

namespace swasr::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum Exit { kOk = 0, kUserError = 1, kRuntimeError = 2 };

/// A user mistake detected by the CLI itself (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class StatusLine {
 public:
  explicit StatusLine(std::string command) : command_(std::move(command)) {}

  template <typename T>
  StatusLine& add(const std::string& key, const T& value) {
    std::ostringstream ss;
    if constexpr (std::is_floating_point_v<T>) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", double(value));
      ss << buf;
    } else {
      ss << value;
    }
    fields_ += " " + key + "=" + quote(ss.str());
    return *this;
  }

  std::string ok() const { return "status=ok command=" + command_ + fields_; }
  std::string error(int code, const std::string& message) const {
    return "status=error command=" + command_ + " code=" + std::to_string(code) + " message=" + json(message).dump();
  }

 private:
  static std::string quote(const std::string& v) {
    if (!v.empty() && v.find_first_of(" \t\"=\n") == std::string::npos) return v;
    return json(v).dump();
  }

  std::string command_;
  std::string fields_;
};

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string mode;
  std::optional<std::uint64_t> seed;
};

PipelineConfig load_config(const Common& c, const std::vector<std::string>& extra = {}) {
  std::vector<std::string> overrides = c.sets;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (!c.mode.empty()) overrides.push_back("mode=" + json(mode_name(parse_mode(c.mode))).dump());
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  if (c.config.empty()) return parse_pipeline_config("{}", fs::current_path(), overrides);
  return load_pipeline_config(c.config, overrides);
}

int classify(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const ManifestInvalid*>(&e) || dynamic_cast<const VocabularyError*>(&e) ||
      dynamic_cast<const TemplateInvalid*>(&e) || dynamic_cast<const InvalidArgument*>(&e) ||
      dynamic_cast<const InvalidBand*>(&e))
    return kUserError;
  return kRuntimeError;
}

// ---------------------------------------------------------------------------

int cmd_preprocess(const Common& c, const std::string& in, const std::string& out_path, std::ostream& out) {
  const PipelineConfig cfg = load_config(c, {"mode=\"hybrid-raw\""});
  const AudioClip clip = load_wav(in);
  const PreprocessResult r = preprocess(clip, cfg.preprocess);
  save_wav(r.clip, out_path);
  out << StatusLine("preprocess")
             .add("samples", r.clip.size())
             .add("rate", r.clip.sample_rate)
             .add("clipped", int(r.clipped))
             .add("silent", int(r.status == NormalizeStatus::silent_input))
             .add("out", out_path)
             .ok()
      << "\n";
  return kOk;
}

int cmd_degrade(const std::string& manifest_path, const std::string& out_dir, const std::string& profile_name,
                const std::string& profiles_file, std::optional<std::uint64_t> seed, std::ostream& out) {
  DegradeProfile profile;
  if (!profiles_file.empty()) {
    const auto profiles = load_profiles(profiles_file);
    const auto it = profiles.find(profile_name);
    if (it == profiles.end()) throw UsageError("profile '" + profile_name + "' not found in " + profiles_file);
    profile = it->second;
  } else {
    profile = preset(profile_name);
  }
  if (seed) profile.seed = *seed;
  const auto manifest = load_manifest(manifest_path);
  const auto degraded = degrade_manifest(manifest, profile, out_dir);
  out << StatusLine("degrade")
             .add("clips", degraded.size())
             .add("profile", profile.name)
             .add("rate", profile.target_rate)
             .add("manifest", (fs::path(out_dir) / "manifest.jsonl").string())
             .ok()
      << "\n";
  return kOk;
}

int cmd_transcribe(const Common& c, const std::string& manifest_path, const std::string& out_path, int parallelism,
                   std::ostream& out) {
  const PipelineConfig cfg = load_config(c, {"mode=\"hybrid-raw\""});
  const auto manifest = load_manifest(manifest_path);
  const auto pipeline = build_pipeline(cfg, manifest);
  const auto results = run_manifest(manifest, *pipeline, parallelism > 0 ? parallelism : default_parallelism(cfg.mode));

  std::string lines;
  std::size_t errors = 0;
  for (const auto& r : results) {
    json j = {{"id", r.id}};
    if (r.status == UtteranceStatus::ok) {
      j.update({{"text", r.fused.text},
                {"confidence", r.fused.confidence},
                {"engine", r.fused.engine_id},
                {"degraded", r.fused.degraded}});
    } else {
      ++errors;
      j["error"] = r.error;
    }
    lines += j.dump() + "\n";
  }
  if (out_path.empty()) {
    out << lines;
  } else {
    write_text_file(out_path, lines);
  }
  out << StatusLine("transcribe").add("utterances", results.size()).add("errors", errors).ok() << "\n";
  return errors > 0 && errors == results.size() ? kRuntimeError : kOk;
}

int cmd_match(const Common& c, const std::vector<std::string>& transcripts, const std::vector<std::string>& vocab,
              const std::string& context, std::ostream& out) {
  std::vector<std::string> extra;
  if (!vocab.empty()) extra.push_back("vocab=" + json(vocab).dump());
  if (!context.empty()) extra.push_back("context=" + json(context).dump());
  const PipelineConfig cfg = load_config(c, extra);
  const auto pipeline = build_pipeline(cfg, {});
  std::size_t degraded = 0;
  for (const auto& t : transcripts) {
    const MatchDecision d = pipeline->verifier().verify(t);
    degraded += d.degraded ? 1 : 0;
    json j = {{"transcript", t},       {"word", d.word},
              {"score", d.score},      {"mode", mode_label(d.mode)},
              {"fallback_used", d.fallback_used}, {"degraded", d.degraded}};
    if (!d.note.empty()) j["note"] = d.note;
    out << j.dump() << "\n";
  }
  out << StatusLine("match").add("mode", mode_label(cfg.mode)).add("transcripts", transcripts.size()).add("degraded", degraded).ok()
      << "\n";
  return kOk;
}

int cmd_run(const Common& c, const std::string& manifest_path, const std::string& out_dir, int parallelism,
            bool progress, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = load_config(c);
  const auto manifest = load_manifest(manifest_path);
  const int workers = parallelism > 0 ? parallelism : default_parallelism(cfg.mode);
  ProgressHook hook;
  if (progress) {
    hook = [&err](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) err << "progress " << done << "/" << total << "\n";
    };
  }
  const ExperimentOutput result = run_experiment(cfg, manifest, out_dir, workers, hook);
  const MetricsSummary& s = result.summaries.front();
  StatusLine status("run");
  status.add("dataset", cfg.dataset)
      .add("mode", mode_label(cfg.mode))
      .add("utterances", result.results.size())
      .add("errors", result.errors)
      .add("accuracy", s.accuracy)
      .add("wer", s.wer)
      .add("parallelism", workers)
      .add("out", out_dir);
  if (result.errors == result.results.size()) {
    out << status.error(kRuntimeError, "every utterance failed; first error: " + result.results.front().error) << "\n";
    return kRuntimeError;
  }
  out << status.ok() << "\n";
  return kOk;
}

int cmd_report(const std::vector<std::string>& results_paths, const std::string& format_name,
               const std::string& out_path, std::ostream& out) {
  std::vector<UtteranceResult> all;
  for (const auto& p : results_paths) {
    const fs::path path(p);
    if (!fs::exists(path)) throw UsageError("no such results file: " + p);
    const fs::path timings = path.parent_path() / "timings.jsonl";
    const std::string timing_text = fs::exists(timings) ? read_text_file(timings) : std::string{};
    auto part = results_from_jsonl(read_text_file(path), timing_text);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  const auto summaries = summarize(all);
  const std::string text = emit_report(summaries, parse_report_format(format_name));
  if (out_path.empty()) {
    out << text;
  } else {
    write_text_file(out_path, text);
  }
  out << StatusLine("report").add("rows", summaries.size()).add("format", format_name).ok() << "\n";
  return kOk;
}

int cmd_dispatch(const std::string& rules_path, const std::string& results_path, const std::vector<std::string>& words,
                 const std::string& mode, double score, const std::string& out_path, std::ostream& out) {
  const RuleSet rules = RuleSet::load(rules_path);
  std::vector<std::pair<std::string, MatchDecision>> decisions;
  if (!results_path.empty()) {
    for (const auto& r : results_from_jsonl(read_text_file(results_path))) {
      if (r.status == UtteranceStatus::ok) decisions.emplace_back(r.id, r.decision);
    }
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    MatchDecision d;
    d.word = words[i];
    d.score = score;
    d.mode = mode.empty() ? MatchMode::cosine : parse_mode(mode);
    decisions.emplace_back("call-" + std::to_string(i + 1), d);
  }
  if (decisions.empty()) throw UsageError("dispatch-sim needs --results or at least one --word");

  // Deterministic timestamps: one tick per logged step.
  std::int64_t tick = 0;
  const Clock clock = [&tick] { return tick++; };
  std::string log;
  std::size_t transfers = 0, alerts = 0;
  for (const auto& [id, d] : decisions) {
    CallSession session(id, clock);
    session.apply_event(CallEvent::ring);
    session.apply_event(CallEvent::answer);
    const Action action = route(d, rules);
    session.apply_action(action);
    session.apply_event(CallEvent::hangup);
    transfers += std::holds_alternative<BlindTransfer>(action) ? 1 : 0;
    alerts += std::holds_alternative<Alert>(action) ? 1 : 0;
    log += session.log_to_jsonl();
  }
  if (out_path.empty()) {
    out << log;
  } else {
    write_text_file(out_path, log);
  }
  out << StatusLine("dispatch-sim").add("sessions", decisions.size()).add("transfers", transfers).add("alerts", alerts).ok()
      << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool with_mode) {
  sub->add_option("--config", c.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "Config override, dotted key=value (repeatable)");
  sub->add_option("--seed", c.seed, "Run seed");
  if (with_mode) sub->add_option("--mode", c.mode, "Matching mode: Hybrid, CS, LS, LLM, CS+C, LLM+C, LLM+C+FS");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-word ASR verification pipeline", "swasr"};
  app.require_subcommand(1);

  Common common;
  std::string in, out_path, manifest, profile = "telephony", profiles_file, rules, results_file, context;
  std::string format = "markdown";
  std::string word_mode;
  double word_score = 1.0;
  int parallelism = 0;
  bool progress = false;
  std::vector<std::string> transcripts, vocab, words, results_files;

  auto* pre = app.add_subcommand("preprocess", "Denoise and normalize one WAV file");
  add_common(pre, common, false);
  pre->add_option("--in", in, "Input WAV")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", out_path, "Output WAV")->required();

  auto* deg = app.add_subcommand("degrade", "Simulate a transmission channel over a manifest");
  deg->add_option("--manifest", manifest, "Source manifest (JSON lines)")->required();
  deg->add_option("--out", out_path, "Output directory")->required();
  deg->add_option("--profile", profile, "Profile name")->capture_default_str();
  deg->add_option("--profiles", profiles_file, "Profiles file (JSON)")->check(CLI::ExistingFile);
  deg->add_option("--seed", common.seed, "Noise seed");

  auto* tr = app.add_subcommand("transcribe", "Hybrid transcription of a manifest");
  add_common(tr, common, false);
  tr->add_option("--manifest", manifest, "Manifest (JSON lines)")->required();
  tr->add_option("--out", out_path, "Output JSON-lines file (default: stdout)");
  tr->add_option("--parallelism", parallelism, "Worker threads")->check(CLI::PositiveNumber);

  auto* ma = app.add_subcommand("match", "Verify transcripts against the vocabulary");
  add_common(ma, common, true);
  ma->add_option("--transcript,-t", transcripts, "Transcript (repeatable)")->required();
  ma->add_option("--vocab", vocab, "Vocabulary words (overrides config)");
  ma->add_option("--context", context, "Context sentence");

  auto* ru = app.add_subcommand("run", "Run one dataset x mode experiment");
  add_common(ru, common, true);
  ru->add_option("--manifest", manifest, "Manifest (JSON lines)")->required();
  ru->add_option("--out", out_path, "Output directory")->required();
  ru->add_option("--parallelism", parallelism, "Worker threads")->check(CLI::PositiveNumber);
  ru->add_flag("--progress", progress, "Report progress on stderr");

  auto* rep = app.add_subcommand("report", "Summarize results files");
  rep->add_option("--results", results_files, "results.jsonl (repeatable)")->required();
  rep->add_option("--format", format, "markdown, csv or json")
      ->check(CLI::IsMember({"markdown", "md", "csv", "json"}))
      ->capture_default_str();
  rep->add_option("--out", out_path, "Output file (default: stdout)");

  auto* dis = app.add_subcommand("dispatch-sim", "Route decisions through simulated calls");
  dis->add_option("--rules", rules, "Rules file (JSON)")->required();
  dis->add_option("--results", results_file, "results.jsonl to route");
  dis->add_option("--word", words, "Matched word (repeatable)");
  dis->add_option("--mode", word_mode, "Mode for --word decisions");
  dis->add_option("--score", word_score, "Score for --word decisions");
  dis->add_option("--out", out_path, "Event log file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kOk;
    out << StatusLine("parse").error(kUserError, e.what()) << "\n";
    return kUserError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (*pre) return cmd_preprocess(common, in, out_path, out);
    if (*deg) return cmd_degrade(manifest, out_path, profile, profiles_file, common.seed, out);
    if (*tr) return cmd_transcribe(common, manifest, out_path, parallelism, out);
    if (*ma) return cmd_match(common, transcripts, vocab, context, out);
    if (*ru) return cmd_run(common, manifest, out_path, parallelism, progress, out, err);
    if (*rep) return cmd_report(results_files, format, out_path, out);
    if (*dis) return cmd_dispatch(rules, results_file, words, word_mode, word_score, out_path, out);
  } catch (const std::exception& e) {
    const int code = classify(e);
    err << "error: " << e.what() << "\n";
    out << StatusLine(name).error(code, e.what()) << "\n";
    return code;
  }
  return kUserError;
}

}  // namespace swasr::cli
