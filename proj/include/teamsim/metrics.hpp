#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamsim/runlog.hpp"

namespace teamsim {

struct AgentMetrics {
  std::map<std::string, long> actions;  // resolved successfully, by action type
  long failed_actions = 0;
  long rejected = 0;
  long policy_failures = 0;
  long messages_sent = 0;
  long invitations_listened = 0;
  long invitations_ignored = 0;
  std::vector<std::string> regions_visited;  // first-visit order
  bool operator==(const AgentMetrics&) const = default;
};

struct MetricsSummary {
  std::string outcome = "time_limit";
  long steps = 0;
  bool aborted = false;
  std::map<std::string, AgentMetrics> agents;
  long messages_sent = 0;
  long messages_listened = 0;
  long messages_ignored = 0;
  long entities_rescued = 0;
  std::vector<std::string> rescued;
  long entities_manipulated = 0;
  long conversations = 0;  // conversations that opened (at least one listener)
  long conversations_unanswered = 0;
  std::string mean_conversation_length = "0.000000";  // turns, fixed 6 decimals
  std::map<std::string, std::string> survey_means;    // item -> fixed 6 decimals
  long survey_flags = 0;
  bool operator==(const MetricsSummary&) const = default;
};

// Replays the log to attribute regions and count rescued entities. Throws
// MalformedLog.
MetricsSummary compute_metrics(const RunLog& log);

nlohmann::json metrics_to_json(const MetricsSummary& m);

std::string fixed6(double v);

}  // namespace teamsim
