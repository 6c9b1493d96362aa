#include "swasr/eval.hpp"

#include "swasr/edit_distance.hpp"
#include "swasr/error.hpp"
#include "swasr/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>

namespace swasr {
namespace {

constexpr const char* kCsvHeader =
    "dataset,mode,count,correct,word_edits,ref_words,accuracy,wer,mean_preprocess_ms,mean_transcribe_ms,"
    "mean_verify_ms,mean_total_ms";

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

/// RFC-4180 records; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw InvalidArgument("CSV ends inside a quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidArgument("bad number in CSV: '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidArgument("bad count in CSV: '" + s + "'");
  return v;
}

struct StageMean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(const std::map<std::string, double>& stages, const char* name) {
    if (const auto it = stages.find(name); it != stages.end()) {
      sum += it->second;
      ++n;
    }
  }
  double value() const { return n ? sum / double(n) : 0.0; }
};

std::string pivot(const std::vector<MetricsSummary>& summaries, const std::vector<std::string>& datasets,
                  const std::vector<std::string>& modes, double MetricsSummary::*field, int digits) {
  std::string out = "| Dataset |";
  for (const auto& m : modes) out += " " + m + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < modes.size(); ++i) out += "---:|";
  out += '\n';
  for (const auto& d : datasets) {
    out += "| " + md_cell(d) + " |";
    for (const auto& m : modes) {
      const auto it = std::find_if(summaries.begin(), summaries.end(),
                                   [&](const MetricsSummary& s) { return s.dataset == d && s.mode == m; });
      out += it == summaries.end() ? " - |" : " " + fmt_fixed((*it).*field, digits) + " |";
    }
    out += '\n';
  }
  return out;
}

std::string emit_markdown(const std::vector<MetricsSummary>& summaries) {
  std::vector<std::string> datasets;
  std::vector<std::string> modes;
  for (const auto& s : summaries) {
    if (std::find(datasets.begin(), datasets.end(), s.dataset) == datasets.end()) datasets.push_back(s.dataset);
  }
  for (MatchMode m : kAllModes) {
    const std::string label = mode_label(m);
    if (std::any_of(summaries.begin(), summaries.end(), [&](const MetricsSummary& s) { return s.mode == label; }))
      modes.push_back(label);
  }
  for (const auto& s : summaries) {
    if (std::find(modes.begin(), modes.end(), s.mode) == modes.end()) modes.push_back(s.mode);
  }

  std::string out;
  out += "## Accuracy\n\n" + pivot(summaries, datasets, modes, &MetricsSummary::accuracy, 2);
  out += "\n## WER\n\n" + pivot(summaries, datasets, modes, &MetricsSummary::wer, 2);
  out += "\n## Mean latency (ms)\n\n" + pivot(summaries, datasets, modes, &MetricsSummary::mean_total_ms, 2);
  out += "\n## Detail\n\n";
  out += "| Dataset | Mode | N | Accuracy | WER | Preprocess (ms) | Transcribe (ms) | Verify (ms) | Mean latency (ms) |\n";
  out += "|---|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const auto& s : summaries) {
    out += "| " + md_cell(s.dataset) + " | " + md_cell(s.mode) + " | " + std::to_string(s.count) + " | " +
           fmt_fixed(s.accuracy, 4) + " | " + fmt_fixed(s.wer, 4) + " | " + fmt_fixed(s.mean_preprocess_ms, 3) +
           " | " + fmt_fixed(s.mean_transcribe_ms, 3) + " | " + fmt_fixed(s.mean_verify_ms, 3) + " | " +
           fmt_fixed(s.mean_total_ms, 3) + " |\n";
  }
  return out;
}

std::string emit_csv(const std::vector<MetricsSummary>& summaries) {
  std::string out = kCsvHeader;
  out += "\r\n";
  for (const auto& s : summaries) {
    out += csv_field(s.dataset) + ',' + csv_field(s.mode) + ',' + std::to_string(s.count) + ',' +
           std::to_string(s.correct) + ',' + std::to_string(s.word_edits) + ',' + std::to_string(s.ref_words) + ',' +
           fmt_double(s.accuracy) + ',' + fmt_double(s.wer) + ',' + fmt_double(s.mean_preprocess_ms) + ',' +
           fmt_double(s.mean_transcribe_ms) + ',' + fmt_double(s.mean_verify_ms) + ',' + fmt_double(s.mean_total_ms) +
           "\r\n";
  }
  return out;
}

std::string emit_json(const std::vector<MetricsSummary>& summaries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : summaries) {
    arr.push_back({{"dataset", s.dataset},
                   {"mode", s.mode},
                   {"count", s.count},
                   {"correct", s.correct},
                   {"word_edits", s.word_edits},
                   {"ref_words", s.ref_words},
                   {"accuracy", s.accuracy},
                   {"wer", s.wer},
                   {"mean_latency_ms",
                    {{"preprocess", s.mean_preprocess_ms},
                     {"transcribe", s.mean_transcribe_ms},
                     {"verify", s.mean_verify_ms},
                     {"total", s.mean_total_ms}}}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace

std::size_t word_edit_distance(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  return edit_distance(hyp, ref);
}

std::vector<std::string> wer_tokens(std::string_view text) { return split_whitespace(fold(text)); }

MetricsSummary compute_metrics(const std::vector<UtteranceResult>& results) {
  if (results.empty()) throw EmptyResults("no results to score");
  MetricsSummary s;
  s.dataset = results.front().dataset;
  s.mode = mode_label(results.front().mode);
  s.count = results.size();

  StageMean pre, tr, ver, total;
  for (const auto& r : results) {
    const std::string hyp = r.status == UtteranceStatus::ok ? r.decision.word : std::string{};
    if (r.status == UtteranceStatus::ok && fold_trim(hyp) == fold_trim(r.label)) ++s.correct;
    const auto ref_tokens = wer_tokens(r.label);
    s.word_edits += word_edit_distance(wer_tokens(hyp), ref_tokens);
    s.ref_words += ref_tokens.size();

    pre.add(r.stage_latency_ms, "preprocess");
    tr.add(r.stage_latency_ms, "transcribe");
    ver.add(r.stage_latency_ms, "verify");
    total.sum += r.total_ms;
    ++total.n;
  }
  if (s.ref_words == 0) throw EmptyResults("reference labels are all empty");
  s.accuracy = double(s.correct) / double(s.count);
  s.wer = double(s.word_edits) / double(s.ref_words);
  s.mean_preprocess_ms = pre.value();
  s.mean_transcribe_ms = tr.value();
  s.mean_verify_ms = ver.value();
  s.mean_total_ms = total.value();
  return s;
}

std::vector<MetricsSummary> summarize(const std::vector<UtteranceResult>& results) {
  if (results.empty()) throw EmptyResults("no results to score");
  std::vector<std::string> datasets;
  for (const auto& r : results) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
  }
  std::vector<MetricsSummary> out;
  for (const auto& d : datasets) {
    for (MatchMode m : kAllModes) {
      std::vector<UtteranceResult> group;
      for (const auto& r : results) {
        if (r.dataset == d && r.mode == m) group.push_back(r);
      }
      if (!group.empty()) out.push_back(compute_metrics(group));
    }
  }
  return out;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "markdown" || text == "md") return ReportFormat::markdown;
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw InvalidArgument("unknown report format '" + std::string(text) + "'");
}

std::string emit_report(const std::vector<MetricsSummary>& summaries, ReportFormat format) {
  switch (format) {
    case ReportFormat::markdown: return emit_markdown(summaries);
    case ReportFormat::csv: return emit_csv(summaries);
    case ReportFormat::json: return emit_json(summaries);
  }
  return {};
}

std::vector<MetricsSummary> parse_csv_report(std::string_view csv) {
  const auto rows = parse_csv(csv);
  if (rows.empty()) throw InvalidArgument("CSV report is empty");
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
  if (header != kCsvHeader) throw InvalidArgument("unexpected CSV header: " + header);

  std::vector<MetricsSummary> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 12) throw InvalidArgument("CSV row " + std::to_string(i) + " has " + std::to_string(f.size()) + " fields");
    MetricsSummary s;
    s.dataset = f[0];
    s.mode = f[1];
    s.count = parse_count(f[2]);
    s.correct = parse_count(f[3]);
    s.word_edits = parse_count(f[4]);
    s.ref_words = parse_count(f[5]);
    s.accuracy = parse_double(f[6]);
    s.wer = parse_double(f[7]);
    s.mean_preprocess_ms = parse_double(f[8]);
    s.mean_transcribe_ms = parse_double(f[9]);
    s.mean_verify_ms = parse_double(f[10]);
    s.mean_total_ms = parse_double(f[11]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace swasr
