#include "swasr/dispatch.hpp"

#include "swasr/error.hpp"
#include "swasr/text.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <limits>
#include <sstream>

namespace swasr {
namespace {

using nlohmann::json;

struct Move {
  const char* event;
  CallState from;
  CallState to;
};

constexpr Move kMoves[] = {
    {"ring", CallState::idle, CallState::ringing},
    {"answer", CallState::ringing, CallState::connected},
    {"transfer_start", CallState::connected, CallState::transferring},
    {"transfer_complete", CallState::transferring, CallState::transferred},
    {"alert", CallState::connected, CallState::alerted},
    {"hangup", CallState::connected, CallState::ended},
    {"hangup", CallState::transferred, CallState::ended},
    {"hangup", CallState::alerted, CallState::ended},
};

std::optional<CallState> target_of(std::string_view event, CallState from) {
  for (const auto& m : kMoves) {
    if (event == m.event && from == m.from) return m.to;
  }
  return std::nullopt;
}

[[noreturn]] void illegal(std::string_view event, CallState from) {
  throw IllegalTransition("cannot " + std::string(event) + " from state " + to_string(from));
}

IntentRule parse_rule(const json& j) {
  if (!j.is_object()) throw ConfigError("each rule must be a JSON object");
  IntentRule rule;
  rule.word = j.at("word").get<std::string>();
  const std::string action = j.value("action", std::string("none"));
  if (action == "blind_transfer" || action == "transfer") {
    rule.action = BlindTransfer{j.value("target", std::string{})};
  } else if (action == "alert") {
    const std::string level = j.value("level", std::string("emergency"));
    if (level == "emergency") {
      rule.action = Alert{AlertLevel::emergency};
    } else if (level == "routine") {
      rule.action = Alert{AlertLevel::routine};
    } else {
      throw ConfigError("unknown alert level '" + level + "'");
    }
  } else if (action == "none") {
    rule.action = NoAction{};
  } else {
    throw ConfigError("unknown action '" + action + "'");
  }
  if (j.contains("min_score") && !j["min_score"].is_null()) rule.min_score = j["min_score"].get<double>();
  return rule;
}

}  // namespace

std::string to_string(AlertLevel level) { return level == AlertLevel::emergency ? "emergency" : "routine"; }

std::string describe(const Action& action) {
  if (const auto* t = std::get_if<BlindTransfer>(&action)) return "blind_transfer(" + t->target + ")";
  if (const auto* a = std::get_if<Alert>(&action)) return "alert(" + to_string(a->level) + ")";
  return "none";
}

RuleSet::RuleSet(std::vector<IntentRule> rules) : rules_(std::move(rules)) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    auto& r = rules_[i];
    r.word = fold_trim(r.word);
    if (r.word.empty()) throw ConfigError("rule with an empty word");
    if (const auto* t = std::get_if<BlindTransfer>(&r.action); t && trim(t->target).empty())
      throw ConfigError("transfer rule for '" + r.word + "' has no target");
    if (!index_.emplace(r.word, i).second) throw ConfigError("more than one rule for '" + r.word + "'");
  }
}

RuleSet RuleSet::parse(std::string_view json_text) {
  const json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) throw ConfigError("rules file must be a JSON array");
  std::vector<IntentRule> rules;
  try {
    for (const auto& j : doc) rules.push_back(parse_rule(j));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid rule: ") + e.what());
  }
  return RuleSet(std::move(rules));
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rules file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const IntentRule* RuleSet::find(std::string_view word) const {
  const auto it = index_.find(fold_trim(word));
  return it == index_.end() ? nullptr : &rules_[it->second];
}

Action route(const MatchDecision& decision, const RuleSet& rules) {
  const IntentRule* rule = rules.find(decision.word);
  if (rule == nullptr) return NoAction{};
  if (rule->min_score) {
    const bool passes = decision.mode == MatchMode::levenshtein ? decision.score <= *rule->min_score
                                                                : decision.score >= *rule->min_score;
    if (!passes) return NoAction{};
  }
  return rule->action;
}

std::string to_string(CallState state) {
  switch (state) {
    case CallState::idle: return "idle";
    case CallState::ringing: return "ringing";
    case CallState::connected: return "connected";
    case CallState::transferring: return "transferring";
    case CallState::transferred: return "transferred";
    case CallState::alerted: return "alerted";
    case CallState::ended: return "ended";
  }
  return "unknown";
}

std::string to_string(CallEvent event) {
  switch (event) {
    case CallEvent::ring: return "ring";
    case CallEvent::answer: return "answer";
    case CallEvent::hangup: return "hangup";
  }
  return "unknown";
}

CallState parse_call_state(std::string_view text) {
  for (auto s : {CallState::idle, CallState::ringing, CallState::connected, CallState::transferring,
                 CallState::transferred, CallState::alerted, CallState::ended}) {
    if (text == to_string(s)) return s;
  }
  throw InvalidArgument("unknown call state '" + std::string(text) + "'");
}

CallEvent parse_call_event(std::string_view text) {
  for (auto e : {CallEvent::ring, CallEvent::answer, CallEvent::hangup}) {
    if (text == to_string(e)) return e;
  }
  throw InvalidArgument("unknown call event '" + std::string(text) + "'");
}

std::int64_t steady_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

CallSession::CallSession(std::string id, Clock clock, SignalingSink* sink)
    : id_(std::move(id)), clock_(clock ? std::move(clock) : Clock(steady_now_ms)), sink_(sink) {}

void CallSession::step(std::string event, CallState to, std::string detail) {
  LogEntry e;
  e.seq = log_.size();
  e.timestamp_ms = clock_();
  if (!log_.empty() && e.timestamp_ms < log_.back().timestamp_ms) e.timestamp_ms = log_.back().timestamp_ms;
  e.event = std::move(event);
  e.from = state_;
  e.to = to;
  e.detail = std::move(detail);
  state_ = to;
  log_.push_back(std::move(e));
  if (sink_) sink_->on_transition(id_, log_.back());
}

CallState CallSession::apply_event(CallEvent event) {
  const std::string name = to_string(event);
  const auto to = target_of(name, state_);
  if (!to) illegal(name, state_);
  step(name, *to, {});
  return state_;
}

CallState CallSession::apply_action(const Action& action) {
  if (const auto* t = std::get_if<BlindTransfer>(&action)) {
    if (state_ != CallState::connected) illegal("transfer", state_);
    step("transfer_start", CallState::transferring, t->target);
    step("transfer_complete", CallState::transferred, t->target);
  } else if (const auto* a = std::get_if<Alert>(&action)) {
    if (state_ != CallState::connected) illegal("alert", state_);
    step("alert", CallState::alerted, to_string(a->level));
  } else {
    step("noop", state_, {});
  }
  return state_;
}

std::string CallSession::log_to_jsonl() const {
  std::string out;
  for (const auto& e : log_) {
    json j = {{"session", id_},  {"seq", e.seq},          {"timestamp_ms", e.timestamp_ms}, {"event", e.event},
              {"from", to_string(e.from)}, {"to", to_string(e.to)}};
    if (!e.detail.empty()) j["detail"] = e.detail;
    out += j.dump();
    out += '\n';
  }
  return out;
}

CallSession apply_action(CallSession session, const Action& action) {
  session.apply_action(action);
  return session;
}

bool is_legal(std::string_view event, CallState from, CallState to) {
  if (event == "noop") return from == to;
  const auto target = target_of(event, from);
  return target && *target == to;
}

CallState replay(const std::vector<LogEntry>& log) {
  CallState state = CallState::idle;
  std::int64_t last_ts = std::numeric_limits<std::int64_t>::min();
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    if (e.seq != i) throw IllegalTransition("log entry " + std::to_string(i) + " is out of sequence");
    if (e.timestamp_ms < last_ts) throw IllegalTransition("log timestamps go backwards at entry " + std::to_string(i));
    if (e.from != state || !is_legal(e.event, e.from, e.to)) illegal(e.event, state);
    state = e.to;
    last_ts = e.timestamp_ms;
  }
  return state;
}

std::vector<LogEntry> log_from_jsonl(std::string_view text) {
  std::vector<LogEntry> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      LogEntry e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
      e.event = j.at("event").get<std::string>();
      e.from = parse_call_state(j.at("from").get<std::string>());
      e.to = parse_call_state(j.at("to").get<std::string>());
      e.detail = j.value("detail", std::string{});
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw InvalidArgument(std::string("bad event log line: ") + ex.what());
    }
  }
  return out;
}

}  // namespace swasr
