#pragma once

#include "swasr/matchers.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace swasr {

struct BlindTransfer {
  std::string target;  // extension
  bool operator==(const BlindTransfer&) const = default;
};

enum class AlertLevel { emergency, routine };

struct Alert {
  AlertLevel level = AlertLevel::emergency;
  bool operator==(const Alert&) const = default;
};

struct NoAction {
  bool operator==(const NoAction&) const = default;
};

using Action = std::variant<NoAction, BlindTransfer, Alert>;

std::string to_string(AlertLevel level);
std::string describe(const Action& action);

struct IntentRule {
  std::string word;
  Action action;
  /// Disabled when unset. Interpreted per mode, see route().
  std::optional<double> min_score;
};

/// Read-only rule table keyed by folded word.
class RuleSet {
 public:
  RuleSet() = default;
  /// Throws ConfigError on duplicate words or empty transfer targets.
  explicit RuleSet(std::vector<IntentRule> rules);

  /// JSON array of {word, action, target?, level?, min_score?} where action is
  /// "blind_transfer", "alert" or "none".
  static RuleSet load(const std::filesystem::path& path);
  static RuleSet parse(std::string_view json_text);

  const IntentRule* find(std::string_view word) const;
  std::size_t size() const { return rules_.size(); }

 private:
  std::vector<IntentRule> rules_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Exact word lookup. The min_score gate passes when score <= min_score for
/// Levenshtein decisions (a distance) and score >= min_score otherwise.
Action route(const MatchDecision& decision, const RuleSet& rules);

enum class CallState { idle, ringing, connected, transferring, transferred, alerted, ended };
enum class CallEvent { ring, answer, hangup };

std::string to_string(CallState state);
std::string to_string(CallEvent event);
CallState parse_call_state(std::string_view text);
CallEvent parse_call_event(std::string_view text);

struct LogEntry {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  std::string event;  // "ring", "answer", "hangup", "transfer_start", "transfer_complete", "alert", "noop"
  CallState from = CallState::idle;
  CallState to = CallState::idle;
  std::string detail;
  bool operator==(const LogEntry&) const = default;
};

/// Where a real signalling stack would attach. Called after each logged step.
class SignalingSink {
 public:
  virtual ~SignalingSink() = default;
  virtual void on_transition(const std::string& session_id, const LogEntry& entry) = 0;
};

using Clock = std::function<std::int64_t()>;

/// Milliseconds on the monotonic clock.
std::int64_t steady_now_ms();

/// Simulated call. Legal moves: idle->ringing->connected, connected->
/// transferring->transferred, connected->alerted, and {connected, transferred,
/// alerted}->ended. Anything else throws IllegalTransition and leaves the
/// session untouched.
class CallSession {
 public:
  explicit CallSession(std::string id, Clock clock = steady_now_ms, SignalingSink* sink = nullptr);

  CallState apply_event(CallEvent event);
  /// Transfer logs two entries, alert one, none a single no-op entry.
  CallState apply_action(const Action& action);

  const std::string& id() const { return id_; }
  CallState state() const { return state_; }
  const std::vector<LogEntry>& log() const { return log_; }

  std::string log_to_jsonl() const;

 private:
  void step(std::string event, CallState to, std::string detail);

  std::string id_;
  Clock clock_;
  SignalingSink* sink_;
  CallState state_ = CallState::idle;
  std::vector<LogEntry> log_;
};

/// Value-style wrapper around CallSession::apply_action.
CallSession apply_action(CallSession session, const Action& action);

/// Whether `event` may move a session from `from` to `to`.
bool is_legal(std::string_view event, CallState from, CallState to);

/// Re-runs a log from idle and returns the final state. Throws
/// IllegalTransition if the log is out of order or contains an illegal step.
CallState replay(const std::vector<LogEntry>& log);

std::vector<LogEntry> log_from_jsonl(std::string_view text);

}  // namespace swasr
