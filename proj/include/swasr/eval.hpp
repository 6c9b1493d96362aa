#pragma once

#include "swasr/pipeline.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace swasr {

/// Unit-cost word-level edit distance between two token lists.
std::size_t word_edit_distance(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

/// Folds, then splits on whitespace.
std::vector<std::string> wer_tokens(std::string_view text);

struct MetricsSummary {
  std::string dataset;
  std::string mode;  // display label, e.g. "LLM+C"
  std::size_t count = 0;
  std::size_t correct = 0;
  std::size_t word_edits = 0;
  std::size_t ref_words = 0;
  double accuracy = 0.0;
  double wer = 0.0;
  double mean_preprocess_ms = 0.0;
  double mean_transcribe_ms = 0.0;
  double mean_verify_ms = 0.0;
  double mean_total_ms = 0.0;

  bool operator==(const MetricsSummary&) const = default;
};

/// One summary over all `results`, labelled with the first result's dataset
/// and mode. Failed utterances score as empty hypotheses. WER is not clamped.
/// Throws EmptyResults.
MetricsSummary compute_metrics(const std::vector<UtteranceResult>& results);

/// One summary per (dataset, mode): datasets in order of first appearance,
/// modes in table order (Hybrid, CS, LS, LLM, CS+C, LLM+C, LLM+C+FS).
std::vector<MetricsSummary> summarize(const std::vector<UtteranceResult>& results);

enum class ReportFormat { markdown, csv, json };

ReportFormat parse_report_format(std::string_view text);

std::string emit_report(const std::vector<MetricsSummary>& summaries, ReportFormat format);

/// Inverse of the CSV report. Throws InvalidArgument on malformed input.
std::vector<MetricsSummary> parse_csv_report(std::string_view csv);

}  // namespace swasr
