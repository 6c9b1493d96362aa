#include "swasr/experiment.hpp"

#include "swasr/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>

namespace swasr {
namespace {

std::string file_stem_for(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.';
    out += safe ? c : '_';
  }
  if (out.empty() || out[0] == '.') out.insert(out.begin(), '_');
  return out;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int default_parallelism(MatchMode mode) {
  const int cores = std::max(1u, std::thread::hardware_concurrency());
  return is_llm_mode(mode) ? std::min(cores, 8) : cores;
}

ExperimentOutput run_experiment(const PipelineConfig& config, const std::vector<ManifestEntry>& manifest,
                                const std::filesystem::path& out_dir, int parallelism, const ProgressHook& progress) {
  if (manifest.empty()) throw ManifestInvalid("manifest has no entries");
  const auto pipeline = build_pipeline(config, manifest);

  ExperimentOutput out;
  out.results = run_manifest(manifest, *pipeline, parallelism, progress);
  out.errors = static_cast<std::size_t>(std::count_if(out.results.begin(), out.results.end(), [](const auto& r) {
    return r.status == UtteranceStatus::error;
  }));
  out.summaries = summarize(out.results);

  write_text_file(out_dir / "results.jsonl", results_to_jsonl(out.results));
  write_text_file(out_dir / "timings.jsonl", timings_to_jsonl(out.results));
  write_text_file(out_dir / "summary.csv", emit_report(out.summaries, ReportFormat::csv));
  write_text_file(out_dir / "summary.md", emit_report(out.summaries, ReportFormat::markdown));
  write_text_file(out_dir / "summary.json", emit_report(out.summaries, ReportFormat::json));
  return out;
}

std::vector<ManifestEntry> degrade_manifest(const std::vector<ManifestEntry>& manifest, const DegradeProfile& profile,
                                            const std::filesystem::path& out_dir) {
  profile.validate();
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestEntry> out;
  out.reserve(manifest.size());
  for (const auto& entry : manifest) {
    AudioClip clip = load_wav(entry.path);
    clip.id = entry.id;
    const AudioClip degraded = degrade(clip, profile);
    const std::string name = file_stem_for(entry.id) + ".wav";
    save_wav(degraded, out_dir / name);
    out.push_back({entry.id, name, entry.label, profile.name});
  }
  // Relative names in the file, so the directory can be moved; absolute paths in the return value.
  write_text_file(out_dir / "manifest.jsonl", manifest_to_jsonl(out));
  for (auto& e : out) e.path = (out_dir / e.path).string();
  return out;
}

}  // namespace swasr
