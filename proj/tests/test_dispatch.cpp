#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/scratch.hpp"
#include "swasr/dispatch.hpp"
#include "swasr/error.hpp"

#include <fstream>
#include <random>
#include <set>
#include <tuple>

using namespace swasr;
using S = CallState;

namespace {

MatchDecision decision(std::string word, double score, MatchMode mode = MatchMode::llm) {
  MatchDecision d;
  d.word = std::move(word);
  d.score = score;
  d.mode = mode;
  return d;
}

RuleSet example_rules() {
  return RuleSet({{"sales", BlindTransfer{"2001"}, std::nullopt},
                  {"help", Alert{AlertLevel::emergency}, std::nullopt},
                  {"stop", NoAction{}, std::nullopt}});
}

/// Ticks by 5 ms per read.
Clock ticking() {
  return [t = std::int64_t{1000}]() mutable { return t += 5; };
}

/// Reference transition table, written out independently of the implementation.
const std::set<std::tuple<std::string, S, S>>& legal_table() {
  static const std::set<std::tuple<std::string, S, S>> t = {
      {"ring", S::idle, S::ringing},
      {"answer", S::ringing, S::connected},
      {"transfer_start", S::connected, S::transferring},
      {"transfer_complete", S::transferring, S::transferred},
      {"alert", S::connected, S::alerted},
      {"hangup", S::connected, S::ended},
      {"hangup", S::transferred, S::ended},
      {"hangup", S::alerted, S::ended},
  };
  return t;
}

const std::vector<S> kStates = {S::idle, S::ringing, S::connected, S::transferring, S::transferred, S::alerted, S::ended};

struct Recorder final : SignalingSink {
  void on_transition(const std::string& id, const LogEntry& e) override { seen.emplace_back(id, e); }
  std::vector<std::pair<std::string, LogEntry>> seen;
};

}  // namespace

TEST_CASE("route: examples") {
  const RuleSet rules = example_rules();
  CHECK(route(decision("sales", 1.0), rules) == Action{BlindTransfer{"2001"}});
  CHECK(route(decision("HELP", 1.0), rules) == Action{Alert{AlertLevel::emergency}});
  CHECK(route(decision("stop", 1.0), rules) == Action{NoAction{}});
  CHECK(route(decision("weather", 1.0), rules) == Action{NoAction{}});
  CHECK(describe(BlindTransfer{"2001"}).find("2001") != std::string::npos);
  CHECK(to_string(AlertLevel::routine) == "routine");
}

TEST_CASE("route: score gate depends on the mode") {
  const RuleSet rules({{"sales", BlindTransfer{"2001"}, 0.8}, {"help", Alert{}, 1.0}});
  CHECK(route(decision("sales", 0.9, MatchMode::cosine), rules) == Action{BlindTransfer{"2001"}});
  CHECK(route(decision("sales", 0.7, MatchMode::cosine), rules) == Action{NoAction{}});
  CHECK(route(decision("sales", 0.8, MatchMode::cosine), rules) == Action{BlindTransfer{"2001"}});
  // For Levenshtein the score is a distance, so smaller passes.
  CHECK(route(decision("help", 1.0, MatchMode::levenshtein), rules) == Action{Alert{}});
  CHECK(route(decision("help", 0.0, MatchMode::levenshtein), rules) == Action{Alert{}});
  CHECK(route(decision("help", 2.0, MatchMode::levenshtein), rules) == Action{NoAction{}});
}

TEST_CASE("rule set: validation and file format") {
  CHECK_THROWS_AS(RuleSet({{"a", NoAction{}, {}}, {"A", Alert{}, {}}}), ConfigError);
  CHECK_THROWS_AS(RuleSet({{"a", BlindTransfer{""}, {}}}), ConfigError);
  CHECK_THROWS_AS(RuleSet({{" ", NoAction{}, {}}}), ConfigError);

  const RuleSet r = RuleSet::parse(R"([
    {"word": "Sales", "action": "blind_transfer", "target": "2001", "min_score": 0.5},
    {"word": "fire", "action": "alert", "level": "emergency"},
    {"word": "hours", "action": "alert", "level": "routine"},
    {"word": "bye", "action": "none"}
  ])");
  CHECK(r.size() == 4);
  REQUIRE(r.find("sales"));
  CHECK(r.find("sales")->min_score == 0.5);
  CHECK(r.find("hours")->action == Action{Alert{AlertLevel::routine}});
  CHECK_FALSE(r.find("nothing"));
  CHECK_THROWS_AS(RuleSet::parse(R"([{"word": "x", "action": "teleport"}])"), ConfigError);
  CHECK_THROWS_AS(RuleSet::parse(R"({"word": "x"})"), ConfigError);
  CHECK_THROWS_AS(RuleSet::parse(R"([{"word": "x", "action": "blind_transfer"}])"), ConfigError);

  testing_support::ScratchDir dir("rules");
  std::ofstream(dir / "r.json") << R"([{"word": "sales", "action": "transfer", "target": "7"}])";
  CHECK(RuleSet::load(dir / "r.json").find("sales")->action == Action{BlindTransfer{"7"}});
  CHECK_THROWS(RuleSet::load(dir / "missing.json"));
}

TEST_CASE("call session: transfer path") {
  Recorder sink;
  CallSession s("call-1", ticking(), &sink);
  CHECK(s.apply_event(CallEvent::ring) == S::ringing);
  CHECK(s.apply_event(CallEvent::answer) == S::connected);
  CHECK(s.apply_action(BlindTransfer{"2001"}) == S::transferred);
  CHECK(s.apply_event(CallEvent::hangup) == S::ended);

  const auto& log = s.log();
  REQUIRE(log.size() == 5);
  CHECK(log[2].event == "transfer_start");
  CHECK(log[2].detail.find("2001") != std::string::npos);
  CHECK(log[3].event == "transfer_complete");
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(log[i].seq == i);
    if (i) CHECK(log[i].timestamp_ms >= log[i - 1].timestamp_ms);
  }
  REQUIRE(sink.seen.size() == 5);
  CHECK(sink.seen[0].first == "call-1");
  CHECK(sink.seen[4].second == log[4]);
  CHECK(replay(log) == S::ended);
}

TEST_CASE("call session: alert, no-op, illegal moves leave state alone") {
  CallSession s("c", ticking());
  CHECK_THROWS_AS(s.apply_action(Alert{}), IllegalTransition);
  CHECK(s.state() == S::idle);
  CHECK(s.log().empty());
  CHECK(s.apply_action(NoAction{}) == S::idle);
  CHECK(s.log().back().event == "noop");

  s.apply_event(CallEvent::ring);
  CHECK_THROWS_AS(s.apply_action(BlindTransfer{"1"}), IllegalTransition);
  CHECK_THROWS_AS(s.apply_event(CallEvent::hangup), IllegalTransition);
  s.apply_event(CallEvent::answer);
  CHECK(s.apply_action(Alert{AlertLevel::routine}) == S::alerted);
  CHECK(s.log().back().detail.find("routine") != std::string::npos);
  CHECK_THROWS_AS(s.apply_action(BlindTransfer{"1"}), IllegalTransition);
  CHECK(s.state() == S::alerted);

  const CallSession copy = apply_action(s, NoAction{});
  CHECK(copy.log().size() == s.log().size() + 1);
  CHECK(s.log().back().event != "noop");
}

TEST_CASE("call session: a clock going backwards still yields ordered timestamps") {
  std::int64_t t = 100;
  CallSession s("c", [&] { return t -= 10; });
  s.apply_event(CallEvent::ring);
  s.apply_event(CallEvent::answer);
  s.apply_action(BlindTransfer{"9"});
  for (std::size_t i = 1; i < s.log().size(); ++i) CHECK(s.log()[i].timestamp_ms >= s.log()[i - 1].timestamp_ms);
}

TEST_CASE("is_legal matches the reference table") {
  for (const char* ev : {"ring", "answer", "hangup", "transfer_start", "transfer_complete", "alert", "bogus"})
    for (S from : kStates)
      for (S to : kStates) {
        CAPTURE(ev);
        CHECK(is_legal(ev, from, to) == (legal_table().count({ev, from, to}) == 1));
      }
}

TEST_CASE("state machine fuzz against the reference table") {
  std::mt19937_64 rng(12);
  const std::vector<Action> actions = {BlindTransfer{"2001"}, Alert{}, NoAction{}};
  for (int trial = 0; trial < 2000; ++trial) {
    CallSession s("fuzz", ticking());
    S model = S::idle;
    for (int step = 0; step < 12; ++step) {
      const S before = s.state();
      const std::size_t log_before = s.log().size();
      if (rng() % 2) {
        const CallEvent ev = std::vector<CallEvent>{CallEvent::ring, CallEvent::answer, CallEvent::hangup}[rng() % 3];
        S target = model;
        bool legal = false;
        for (const auto& [name, from, to] : legal_table())
          if (name == to_string(ev) && from == model) {
            target = to;
            legal = true;
          }
        if (legal) {
          CHECK(s.apply_event(ev) == target);
          model = target;
        } else {
          CHECK_THROWS_AS(s.apply_event(ev), IllegalTransition);
        }
      } else {
        const Action& a = actions[rng() % actions.size()];
        bool legal = true;
        S target = model;
        if (std::holds_alternative<BlindTransfer>(a)) {
          legal = model == S::connected;
          target = S::transferred;
        } else if (std::holds_alternative<Alert>(a)) {
          legal = model == S::connected;
          target = S::alerted;
        }
        if (legal) {
          CHECK(s.apply_action(a) == target);
          model = target;
        } else {
          CHECK_THROWS_AS(s.apply_action(a), IllegalTransition);
        }
      }
      if (s.log().size() == log_before) CHECK(s.state() == before);
      REQUIRE(s.state() == model);
    }
    CHECK(replay(s.log()) == model);
    CHECK(log_from_jsonl(s.log_to_jsonl()) == s.log());
  }
}

TEST_CASE("replay rejects tampered logs") {
  CallSession s("c", ticking());
  s.apply_event(CallEvent::ring);
  s.apply_event(CallEvent::answer);
  s.apply_action(BlindTransfer{"5"});

  auto reordered = s.log();
  std::swap(reordered[1], reordered[2]);
  CHECK_THROWS_AS(replay(reordered), IllegalTransition);

  auto skipped = s.log();
  skipped.erase(skipped.begin() + 1);
  CHECK_THROWS_AS(replay(skipped), IllegalTransition);

  auto forged = s.log();
  forged[2].to = S::ended;
  CHECK_THROWS_AS(replay(forged), IllegalTransition);

  auto time_travel = s.log();
  time_travel[3].timestamp_ms = 0;
  CHECK_THROWS_AS(replay(time_travel), IllegalTransition);

  CHECK(replay({}) == S::idle);
  CHECK_THROWS(log_from_jsonl("{\"seq\": \"x\"}\n"));
}

TEST_CASE("state and event names") {
  for (S st : kStates) CHECK(parse_call_state(to_string(st)) == st);
  for (CallEvent e : {CallEvent::ring, CallEvent::answer, CallEvent::hangup}) CHECK(parse_call_event(to_string(e)) == e);
  CHECK_THROWS(parse_call_state("on_hold"));
  CHECK_THROWS(parse_call_event("park"));
}
