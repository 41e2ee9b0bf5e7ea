#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace teamsim {

struct AgentState;
namespace llm {
class CompletionBackend;
}

struct SurveyItem {
  std::string id;
  std::string prompt;
  int scale_min = 0;
  int scale_max = 10;
  bool operator==(const SurveyItem&) const = default;
};

struct SurveyResponse {
  std::string agent;
  std::string item;
  int value = 0;
  std::string rationale;
  bool clamped = false;
  bool operator==(const SurveyResponse&) const = default;
};

// Reasons: "clamped", "unparseable", "policy_failure".
struct SurveyFlag {
  std::string agent;
  std::string item;
  std::string reason;
  std::string raw;
  bool operator==(const SurveyFlag&) const = default;
};

struct SurveyResult {
  std::vector<SurveyResponse> responses;
  std::vector<SurveyFlag> flags;
};

// Team-functioning dimensions. Wording is this project's own.
std::vector<SurveyItem> default_survey_items();
// Perspective-taking items about teammates' knowledge and intentions.
std::vector<SurveyItem> theory_of_mind_items();

// First (optionally signed) integer in the reply, if any.
std::optional<long> parse_survey_value(std::string_view reply);

struct ScoredReply {
  std::optional<int> value;  // empty when unparseable
  bool clamped = false;
};
ScoredReply score_reply(std::string_view reply, const SurveyItem& item);

// One request per (agent, item), answered from the agent's top-k memories.
// Out-of-range values are clamped and flagged; unparseable replies and
// backend failures omit the response and are flagged.
SurveyResult administer_survey(const std::vector<const AgentState*>& agents, const std::vector<SurveyItem>& items,
                               llm::CompletionBackend& backend, std::size_t k = 5);

nlohmann::json survey_response_to_json(const SurveyResponse& r);
SurveyResponse survey_response_from_json(const nlohmann::json& j);
nlohmann::json survey_flag_to_json(const SurveyFlag& f);
SurveyFlag survey_flag_from_json(const nlohmann::json& j);

}  // namespace teamsim
