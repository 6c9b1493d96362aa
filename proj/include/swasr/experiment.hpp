#pragma once

#include "swasr/channel.hpp"
#include "swasr/eval.hpp"
#include "swasr/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace swasr {

struct ExperimentOutput {
  std::vector<UtteranceResult> results;
  std::vector<MetricsSummary> summaries;
  std::size_t errors = 0;
};

/// Default worker count: the number of cores, at most 8 for LLM modes.
int default_parallelism(MatchMode mode);

/// Runs one dataset x mode cell and writes results.jsonl, timings.jsonl,
/// summary.csv, summary.md and summary.json into `out_dir`.
ExperimentOutput run_experiment(const PipelineConfig& config, const std::vector<ManifestEntry>& manifest,
                                const std::filesystem::path& out_dir, int parallelism,
                                const ProgressHook& progress = {});

/// Degrades every clip into `out_dir/<id>.wav` and writes `out_dir/manifest.jsonl`
/// with the platform field set to the profile name. Returns the new manifest.
std::vector<ManifestEntry> degrade_manifest(const std::vector<ManifestEntry>& manifest, const DegradeProfile& profile,
                                            const std::filesystem::path& out_dir);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace swasr
