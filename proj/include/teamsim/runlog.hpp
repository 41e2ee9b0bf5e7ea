#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "teamsim/survey.hpp"
#include "teamsim/world.hpp"

namespace teamsim {

inline constexpr int kRunLogFormatVersion = 1;

enum class RecordKind {
  EventScheduled,
  EventResolved,
  EventRejected,
  StateDelta,
  Decision,
  MessageDelivered,
  MessageIgnored,
  ConversationStarted,
  ConversationClosed,
  PolicyFailure,
  Warning,
  SuccessDetected,
  RunEnded,
};

std::string to_string(RecordKind k);
std::optional<RecordKind> record_kind_from_string(std::string_view s);

struct LogRecord {
  long seq = 0;
  long step = 0;
  RecordKind kind = RecordKind::Warning;
  std::string agent;  // empty for engine-level records
  nlohmann::json payload = nlohmann::json::object();
  std::string rationale;
  bool operator==(const LogRecord&) const = default;
};

struct RunHeader {
  int format_version = kRunLogFormatVersion;
  std::string scenario_id;
  std::uint64_t seed = 0;
  long max_steps = 0;
  std::string goal;
  nlohmann::json predicate;
  nlohmann::json agents = nlohmann::json::array();  // [{name, role, policy}]
  bool operator==(const RunHeader&) const = default;
};

struct Outcome {
  enum class Kind { Success, TimeLimit };
  Kind kind = Kind::TimeLimit;
  long step = 0;
  bool aborted = false;
  bool operator==(const Outcome&) const = default;
};

std::string to_string(Outcome::Kind k);

struct RunLog {
  RunHeader header;
  nlohmann::json initial_world;
  std::vector<LogRecord> records;
  std::vector<SurveyResponse> surveys;
  std::vector<SurveyFlag> survey_flags;
  std::optional<Outcome> outcome;
  nlohmann::json final_world;
  nlohmann::json metrics;  // null until computed
  bool operator==(const RunLog&) const = default;
};

nlohmann::json record_to_json(const LogRecord& r);
LogRecord record_from_json(const nlohmann::json& j);
nlohmann::json run_log_to_json(const RunLog& log);
RunLog run_log_from_json(const nlohmann::json& j);

// Canonical document: sorted keys, integers only, fixed indentation.
std::string export_log(const RunLog& log);
// Throws SyntaxError, VersionMismatch, MalformedLog (integrity included).
RunLog import_log(std::string_view document);

void save_log(const RunLog& log, const std::string& path);
RunLog load_log(const std::string& path);

// Sequence numbers are 0..n-1 and steps nondecreasing. Throws MalformedLog.
void check_integrity(const RunLog& log);

// Initial snapshot with every StateDelta applied in record order.
World replay_world(const RunLog& log);

struct ReplayReport {
  bool ok = false;
  std::size_t deltas = 0;
  std::string message;
};
// Compares the replayed world with the log's final snapshot.
ReplayReport verify_replay(const RunLog& log);

}  // namespace teamsim
