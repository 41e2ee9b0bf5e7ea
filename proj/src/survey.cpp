#include "teamsim/survey.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "teamsim/agent.hpp"
#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"

namespace teamsim {

using json = nlohmann::json;

std::vector<SurveyItem> default_survey_items() {
  return {
      {"communication", "How well did information flow between you and your teammates during the mission?"},
      {"coordination", "How well did the team organise who did what, and when?"},
      {"trust_in_bot", "How much did you rely on your teammates to do their part?"},
      {"emerging_leadership", "How clearly did someone take the lead when the team needed direction?"},
      {"collective_self_efficacy", "How confident are you that this team could succeed at a similar mission?"},
      {"team_processes", "How effective were the team's routines for planning and checking progress?"},
  };
}

std::vector<SurveyItem> theory_of_mind_items() {
  return {
      {"tom_knowledge", "How well could you tell what your teammates knew about the environment?"},
      {"tom_intentions", "How well could you anticipate what your teammates were about to do?"},
      {"tom_beliefs", "How accurately did your teammates understand what you were doing?"},
  };
}

std::optional<long> parse_survey_value(std::string_view reply) {
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) continue;
    const bool negative = i > 0 && reply[i - 1] == '-';
    long v = 0;
    std::size_t j = i;
    for (; j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j])); ++j) {
      if (v > std::numeric_limits<long>::max() / 10 - 10) {
        v = std::numeric_limits<long>::max() / 2;  // saturate; clamped below anyway
      } else {
        v = v * 10 + (reply[j] - '0');
      }
    }
    return negative ? -v : v;
  }
  return std::nullopt;
}

ScoredReply score_reply(std::string_view reply, const SurveyItem& item) {
  const auto raw = parse_survey_value(reply);
  if (!raw) return {};
  const long clamped = std::clamp<long>(*raw, item.scale_min, item.scale_max);
  return {static_cast<int>(clamped), clamped != *raw};
}

SurveyResult administer_survey(const std::vector<const AgentState*>& agents, const std::vector<SurveyItem>& items,
                               llm::CompletionBackend& backend, std::size_t k) {
  SurveyResult result;
  for (const AgentState* agent : agents) {
    for (const auto& item : items) {
      llm::CompletionRequest req;
      req.tag = llm::Purpose::Survey;
      req.max_reply_chars = 400;
      req.system = "You are " + agent->name() + ", the " + agent->profile.role +
                   " of a simulated team, answering a questionnaire after the mission. Start your reply with an "
                   "integer rating from " +
                   std::to_string(item.scale_min) + " to " + std::to_string(item.scale_max) +
                   ", then justify it citing memories as m<id>.";
      req.user = "[profile]\nname: " + agent->name() + "\nrole: " + agent->profile.role + "\n[memories]\n" +
                 render_memories(agent->memory.retrieve(item.prompt, k)) + "[item]\n" + item.id + ": " +
                 item.prompt + "\n";
      std::string reply;
      try {
        reply = backend.complete(req).text;
      } catch (const Error& e) {
        result.flags.push_back({agent->name(), item.id, "policy_failure", e.what()});
        continue;
      }
      const auto scored = score_reply(reply, item);
      if (!scored.value) {
        result.flags.push_back({agent->name(), item.id, "unparseable", reply});
        continue;
      }
      if (scored.clamped) result.flags.push_back({agent->name(), item.id, "clamped", reply});
      result.responses.push_back({agent->name(), item.id, *scored.value, reply, scored.clamped});
    }
  }
  return result;
}

json survey_response_to_json(const SurveyResponse& r) {
  return {{"agent", r.agent}, {"item", r.item}, {"value", r.value}, {"rationale", r.rationale}, {"clamped", r.clamped}};
}

SurveyResponse survey_response_from_json(const json& j) {
  try {
    return {j.at("agent").get<std::string>(), j.at("item").get<std::string>(), j.at("value").get<int>(),
            j.at("rationale").get<std::string>(), j.at("clamped").get<bool>()};
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad survey response: ") + e.what());
  }
}

json survey_flag_to_json(const SurveyFlag& f) {
  return {{"agent", f.agent}, {"item", f.item}, {"reason", f.reason}, {"raw", f.raw}};
}

SurveyFlag survey_flag_from_json(const json& j) {
  try {
    return {j.at("agent").get<std::string>(), j.at("item").get<std::string>(), j.at("reason").get<std::string>(),
            j.at("raw").get<std::string>()};
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad survey flag: ") + e.what());
  }
}

}  // namespace teamsim
