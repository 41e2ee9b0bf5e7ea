#include "teamsim/runlog.hpp"

#include <fstream>
#include <sstream>

#include "teamsim/error.hpp"
#include "teamsim/snapshot.hpp"

namespace teamsim {

using json = nlohmann::json;

namespace {

const std::vector<std::pair<RecordKind, const char*>>& kind_names() {
  static const std::vector<std::pair<RecordKind, const char*>> names{
      {RecordKind::EventScheduled, "EventScheduled"},
      {RecordKind::EventResolved, "EventResolved"},
      {RecordKind::EventRejected, "EventRejected"},
      {RecordKind::StateDelta, "StateDelta"},
      {RecordKind::Decision, "Decision"},
      {RecordKind::MessageDelivered, "MessageDelivered"},
      {RecordKind::MessageIgnored, "MessageIgnored"},
      {RecordKind::ConversationStarted, "ConversationStarted"},
      {RecordKind::ConversationClosed, "ConversationClosed"},
      {RecordKind::PolicyFailure, "PolicyFailure"},
      {RecordKind::Warning, "Warning"},
      {RecordKind::SuccessDetected, "SuccessDetected"},
      {RecordKind::RunEnded, "RunEnded"},
  };
  return names;
}

}  // namespace

std::string to_string(RecordKind k) {
  for (const auto& [kind, name] : kind_names()) {
    if (kind == k) return name;
  }
  return "Warning";
}

std::optional<RecordKind> record_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kind_names()) {
    if (s == name) return kind;
  }
  return std::nullopt;
}

std::string to_string(Outcome::Kind k) { return k == Outcome::Kind::Success ? "success" : "time_limit"; }

json record_to_json(const LogRecord& r) {
  json j = {{"seq", r.seq}, {"step", r.step}, {"kind", to_string(r.kind)}, {"payload", r.payload}};
  if (!r.agent.empty()) j["agent"] = r.agent;
  if (!r.rationale.empty()) j["rationale"] = r.rationale;
  return j;
}

LogRecord record_from_json(const json& j) {
  try {
    LogRecord r;
    r.seq = j.at("seq").get<long>();
    r.step = j.at("step").get<long>();
    const auto kind = record_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw MalformedLog("unknown record kind '" + j.at("kind").get<std::string>() + "'");
    r.kind = *kind;
    r.agent = j.value("agent", std::string{});
    r.payload = j.at("payload");
    r.rationale = j.value("rationale", std::string{});
    return r;
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad log record: ") + e.what());
  }
}

json run_log_to_json(const RunLog& log) {
  json records = json::array();
  for (const auto& r : log.records) records.push_back(record_to_json(r));
  json surveys = json::array();
  for (const auto& s : log.surveys) surveys.push_back(survey_response_to_json(s));
  json flags = json::array();
  for (const auto& f : log.survey_flags) flags.push_back(survey_flag_to_json(f));
  json outcome = nullptr;
  if (log.outcome) {
    outcome = {{"kind", to_string(log.outcome->kind)}, {"step", log.outcome->step}, {"aborted", log.outcome->aborted}};
  }
  return {{"format_version", log.header.format_version},
          {"header",
           {{"scenario_id", log.header.scenario_id},
            {"seed", log.header.seed},
            {"max_steps", log.header.max_steps},
            {"goal", log.header.goal},
            {"predicate", log.header.predicate},
            {"agents", log.header.agents}}},
          {"initial_world", log.initial_world},
          {"records", records},
          {"surveys", surveys},
          {"survey_flags", flags},
          {"outcome", outcome},
          {"final_world", log.final_world},
          {"metrics", log.metrics}};
}

RunLog run_log_from_json(const json& j) {
  if (!j.is_object() || !j.contains("format_version")) throw MalformedLog("run log has no format_version");
  if (!j.at("format_version").is_number_integer()) throw MalformedLog("format_version must be an integer");
  const int version = j.at("format_version").get<int>();
  if (version != kRunLogFormatVersion) {
    throw VersionMismatch("run log format_version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kRunLogFormatVersion) + ")");
  }
  try {
    RunLog log;
    const auto& h = j.at("header");
    log.header.format_version = version;
    log.header.scenario_id = h.at("scenario_id").get<std::string>();
    log.header.seed = h.at("seed").get<std::uint64_t>();
    log.header.max_steps = h.at("max_steps").get<long>();
    log.header.goal = h.at("goal").get<std::string>();
    log.header.predicate = h.at("predicate");
    log.header.agents = h.at("agents");
    log.initial_world = j.at("initial_world");
    for (const auto& r : j.at("records")) log.records.push_back(record_from_json(r));
    for (const auto& s : j.at("surveys")) log.surveys.push_back(survey_response_from_json(s));
    for (const auto& f : j.at("survey_flags")) log.survey_flags.push_back(survey_flag_from_json(f));
    if (const auto& o = j.at("outcome"); !o.is_null()) {
      const auto kind = o.at("kind").get<std::string>();
      if (kind != "success" && kind != "time_limit") throw MalformedLog("unknown outcome '" + kind + "'");
      log.outcome = Outcome{kind == "success" ? Outcome::Kind::Success : Outcome::Kind::TimeLimit,
                            o.at("step").get<long>(), o.at("aborted").get<bool>()};
    }
    log.final_world = j.at("final_world");
    log.metrics = j.at("metrics");
    check_integrity(log);
    return log;
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("malformed run log: ") + e.what());
  }
}

std::string export_log(const RunLog& log) { return run_log_to_json(log).dump(1) + "\n"; }

RunLog import_log(std::string_view document) {
  json j;
  try {
    j = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    // byte offset only; compute line/column from it
    const std::size_t at = std::min(e.byte, document.size());
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < at; ++i) {
      if (document[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SyntaxError("malformed run log document", line, col);
  }
  return run_log_from_json(j);
}

void save_log(const RunLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << export_log(log);
}

RunLog load_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return import_log(buf.str());
}

void check_integrity(const RunLog& log) {
  long last_step = 0;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    if (r.seq != static_cast<long>(i)) {
      throw MalformedLog("record sequence gap: expected seq " + std::to_string(i) + ", found " + std::to_string(r.seq));
    }
    if (r.step < last_step) throw MalformedLog("record " + std::to_string(r.seq) + " steps backwards");
    last_step = r.step;
  }
}

World replay_world(const RunLog& log) {
  World world = world_from_json(log.initial_world);
  for (const auto& r : log.records) {
    if (r.kind != RecordKind::StateDelta) continue;
    world.step = r.step;
    try {
      apply_world_change(world, change_from_json(r.payload.at("change")));
    } catch (const json::exception& e) {
      throw MalformedLog("record " + std::to_string(r.seq) + " has no change");
    } catch (const IllegalChange& e) {
      throw MalformedLog("record " + std::to_string(r.seq) + " does not replay: " + e.what());
    }
  }
  if (log.outcome) world.step = log.outcome->step;
  return world;
}

ReplayReport verify_replay(const RunLog& log) {
  ReplayReport report;
  for (const auto& r : log.records) report.deltas += r.kind == RecordKind::StateDelta;
  try {
    check_integrity(log);
    const World replayed = replay_world(log);
    const World final_world = world_from_json(log.final_world);
    report.ok = replayed == final_world;
    report.message = report.ok ? "replay reproduces the final world" : "replayed world differs from the final snapshot";
  } catch (const Error& e) {
    report.message = e.what();
  }
  return report;
}

}  // namespace teamsim
