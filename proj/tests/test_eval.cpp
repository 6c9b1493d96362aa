#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/scratch.hpp"
#include "support/text_oracle.hpp"
#include "swasr/error.hpp"
#include "swasr/eval.hpp"

#include <json.hpp>

#include <random>

using namespace swasr;

namespace {

UtteranceResult result(std::string label, std::string word, MatchMode mode = MatchMode::levenshtein,
                       std::string dataset = "GSC") {
  UtteranceResult r;
  r.id = label + "-" + word;
  r.label = std::move(label);
  r.decision.word = std::move(word);
  r.mode = mode;
  r.dataset = std::move(dataset);
  return r;
}

/// All token lists over `words` with length up to `max_len`.
std::vector<std::vector<std::string>> all_lists(const std::vector<std::string>& words, std::size_t max_len) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : frontier)
      for (const auto& w : words) {
        auto l = prefix;
        l.push_back(w);
        next.push_back(l);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("word edit distance: examples and oracle") {
  using V = std::vector<std::string>;
  CHECK(word_edit_distance(V{"turn", "left"}, V{"left"}) == 1);
  CHECK(word_edit_distance(V{}, V{"stop"}) == 1);
  CHECK(word_edit_distance(V{"a", "b", "c"}, V{"c", "b", "a"}) == 2);
  CHECK(wer_tokens("  Turn LEFT\tnow ") == V{"turn", "left", "now"});

  const auto lists = all_lists({"go", "up", "no"}, 4);
  std::size_t mismatches = 0;
  for (const auto& a : lists)
    for (const auto& b : lists) mismatches += word_edit_distance(a, b) != oracle::edit_distance(a, b);
  CHECK(mismatches == 0);
}

TEST_CASE("metrics: 59 of 100 correct") {
  std::vector<UtteranceResult> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(result("stop", i < 59 ? "STOP" : "go"));
  const auto m = compute_metrics(rs);
  CHECK(m.count == 100);
  CHECK(m.correct == 59);
  CHECK(m.accuracy == doctest::Approx(0.59));
  CHECK(m.wer == doctest::Approx(0.41));
  CHECK(m.mode == "LS");
  CHECK(m.dataset == "GSC");
}

TEST_CASE("metrics: errors, multiword hypotheses, latency means") {
  std::vector<UtteranceResult> rs{result("stop", "stop"), result("stop", "stop"), result("go", "turn left now", MatchMode::hybrid_raw)};
  rs[1].status = UtteranceStatus::error;
  rs[0].stage_latency_ms = {{"preprocess", 2.0}, {"transcribe", 10.0}, {"verify", 1.0}};
  rs[2].stage_latency_ms = {{"preprocess", 4.0}, {"transcribe", 20.0}, {"verify", 3.0}};
  rs[0].total_ms = 15.0;
  rs[1].total_ms = 3.0;
  rs[2].total_ms = 30.0;
  const auto m = compute_metrics(rs);
  CHECK(m.correct == 1);
  CHECK(m.word_edits == 0 + 1 + 3);
  CHECK(m.wer == doctest::Approx(4.0 / 3.0));  // not clamped
  CHECK(m.mean_preprocess_ms == doctest::Approx(3.0));
  CHECK(m.mean_verify_ms == doctest::Approx(2.0));
  CHECK(m.mean_total_ms == doctest::Approx(16.0));

  CHECK_THROWS_AS(compute_metrics({}), EmptyResults);
  CHECK_THROWS_AS(summarize({}), EmptyResults);
}

TEST_CASE("metrics: accuracy and WER are complementary for single-word decisions") {
  std::mt19937_64 rng(5);
  const auto& words = testing_support::gsc_words();
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<UtteranceResult> rs;
    const std::size_t n = 1 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = result(words[rng() % words.size()], words[rng() % words.size()]);
      if (rng() % 10 == 0) r.status = UtteranceStatus::error;
      rs.push_back(r);
    }
    const auto m = compute_metrics(rs);
    CHECK(m.accuracy + m.wer == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("summarize: grouping and order") {
  std::vector<UtteranceResult> rs;
  for (const char* ds : {"Telephony", "GSC"})
    for (MatchMode m : {MatchMode::llm_context_fewshot, MatchMode::hybrid_raw, MatchMode::cosine})
      for (int i = 0; i < 3; ++i) rs.push_back(result("yes", i ? "yes" : "no", m, ds));
  const auto s = summarize(rs);
  REQUIRE(s.size() == 6);
  CHECK(s[0].dataset == "Telephony");
  CHECK(s[0].mode == "Hybrid");
  CHECK(s[1].mode == "CS");
  CHECK(s[2].mode == "LLM+C+FS");
  CHECK(s[3].dataset == "GSC");
  for (const auto& x : s) CHECK(x.count == 3);
}

TEST_CASE("reports: CSV round trip, full grid, markdown columns, JSON") {
  std::vector<UtteranceResult> rs;
  std::mt19937_64 rng(9);
  for (const char* ds : {"GSC", "Tele, \"quoted\""})
    for (MatchMode m : kAllModes)
      for (int i = 0; i < 5; ++i) {
        auto r = result("yes", rng() % 2 ? "yes" : "no", m, ds);
        r.stage_latency_ms = {{"preprocess", 0.1 * double(rng() % 100)}, {"verify", 1.0 / 3.0}};
        r.total_ms = 10.0 + double(rng() % 1000) / 7.0;
        rs.push_back(r);
      }
  const auto summaries = summarize(rs);
  REQUIRE(summaries.size() == 14);

  const auto csv = emit_report(summaries, ReportFormat::csv);
  CHECK(csv.rfind(
            "dataset,mode,count,correct,word_edits,ref_words,accuracy,wer,mean_preprocess_ms,mean_transcribe_ms,"
            "mean_verify_ms,mean_total_ms\r\n",
            0) == 0);
  CHECK(parse_csv_report(csv) == summaries);
  CHECK_THROWS_AS(parse_csv_report("nope\r\n1,2\r\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_csv_report(csv.substr(0, csv.size() - 5) + "\"\r\n"), InvalidArgument);

  const auto md = emit_report(summaries, ReportFormat::markdown);
  CHECK(md.find("## Accuracy") != std::string::npos);
  CHECK(md.find("## WER") != std::string::npos);
  CHECK(md.find("Mean latency (ms)") != std::string::npos);
  CHECK(md.find("| Dataset | Hybrid | CS | LS | LLM | CS+C | LLM+C | LLM+C+FS |") != std::string::npos);

  const auto js = nlohmann::json::parse(emit_report(summaries, ReportFormat::json));
  REQUIRE(js.size() == 14);
  CHECK(js[0]["mean_latency_ms"].contains("total"));
  CHECK(js[13]["dataset"] == "Tele, \"quoted\"");

  CHECK(parse_report_format("md") == ReportFormat::markdown);
  CHECK_THROWS_AS(parse_report_format("xlsx"), InvalidArgument);
}
