#include "teamsim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "teamsim/error.hpp"
#include "teamsim/evaluation.hpp"
#include "teamsim/snapshot.hpp"

namespace teamsim {

using json = nlohmann::json;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

namespace {

void visit_region(AgentMetrics& m, const std::string& region) {
  if (std::find(m.regions_visited.begin(), m.regions_visited.end(), region) == m.regions_visited.end()) {
    m.regions_visited.push_back(region);
  }
}

}  // namespace

MetricsSummary compute_metrics(const RunLog& log) {
  check_integrity(log);
  MetricsSummary m;
  if (log.outcome) {
    m.outcome = to_string(log.outcome->kind);
    m.steps = log.outcome->step;
    m.aborted = log.outcome->aborted;
  } else if (!log.records.empty()) {
    m.steps = log.records.back().step;
  }
  try {
    for (const auto& a : log.header.agents) m.agents[a.at("name").get<std::string>()];
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad agent list in header: ") + e.what());
  }

  std::optional<World> world;
  if (!log.initial_world.is_null()) {
    world = world_from_json(log.initial_world);
    for (const auto& body : world->agents) visit_region(m.agents[body.name], world->region_name(world->region_at(body.cell)));
  }

  std::set<std::string> manipulated;
  long turns = 0;
  try {
    for (const auto& r : log.records) {
      const auto& p = r.payload;
      switch (r.kind) {
        case RecordKind::EventResolved:
          if (p.at("kind").get<std::string>() == "action") {
            auto& a = m.agents[r.agent];
            if (p.at("ok").get<bool>()) {
              ++a.actions[p.at("action").at("type").get<std::string>()];
            } else {
              ++a.failed_actions;
            }
          }
          break;
        case RecordKind::EventRejected:
          ++m.agents[r.agent].rejected;
          break;
        case RecordKind::PolicyFailure:
          if (!r.agent.empty()) ++m.agents[r.agent].policy_failures;
          break;
        case RecordKind::StateDelta: {
          const auto change = change_from_json(p.at("change"));
          if (world) {
            world->step = r.step;
            apply_world_change(*world, change);
          }
          if (const auto* mv = std::get_if<MoveAgent>(&change)) {
            if (world) visit_region(m.agents[mv->agent], world->region_name(world->region_at(mv->to)));
          } else if (const auto* pu = std::get_if<PickUpEntity>(&change)) {
            manipulated.insert(pu->entity);
          } else if (const auto* pd = std::get_if<PutDownEntity>(&change)) {
            manipulated.insert(pd->entity);
          } else if (const auto* sa = std::get_if<SetAttribute>(&change)) {
            manipulated.insert(sa->entity);
          } else if (const auto* re = std::get_if<RemoveEntity>(&change)) {
            manipulated.insert(re->entity);
          }
          break;
        }
        case RecordKind::MessageDelivered:
          if (p.value("invitation", false)) {
            ++m.messages_listened;
            ++m.agents[r.agent].invitations_listened;
          } else if (p.at("recipient_index").get<long>() == 0) {
            // one record per recipient; count each turn once
            ++m.messages_sent;
            ++m.agents[p.at("from").get<std::string>()].messages_sent;
          }
          break;
        case RecordKind::MessageIgnored:
          ++m.messages_ignored;
          ++m.agents[r.agent].invitations_ignored;
          break;
        case RecordKind::ConversationClosed:
          if (p.at("reason").get<std::string>() == "unanswered") {
            ++m.conversations_unanswered;
          } else {
            ++m.conversations;
            turns += p.at("turns").get<long>();
          }
          break;
        default:
          break;
      }
    }
  } catch (const json::exception& e) {
    throw MalformedLog(std::string("bad record payload: ") + e.what());
  } catch (const IllegalChange& e) {
    throw MalformedLog(std::string("state delta does not replay: ") + e.what());
  }
  m.entities_manipulated = static_cast<long>(manipulated.size());
  if (m.conversations > 0) m.mean_conversation_length = fixed6(static_cast<double>(turns) / m.conversations);

  if (world && !log.header.predicate.is_null()) {
    m.rescued = delivered_entities(delivery_targets(predicate_from_json(log.header.predicate)), *world);
    m.entities_rescued = static_cast<long>(m.rescued.size());
  }

  std::map<std::string, std::pair<long, long>> sums;
  for (const auto& s : log.surveys) {
    auto& [total, n] = sums[s.item];
    total += s.value;
    ++n;
  }
  for (const auto& [item, tn] : sums) m.survey_means[item] = fixed6(static_cast<double>(tn.first) / tn.second);
  m.survey_flags = static_cast<long>(log.survey_flags.size());
  return m;
}

json metrics_to_json(const MetricsSummary& m) {
  json agents = json::object();
  for (const auto& [name, a] : m.agents) {
    agents[name] = {{"actions", a.actions},
                    {"failed_actions", a.failed_actions},
                    {"rejected", a.rejected},
                    {"policy_failures", a.policy_failures},
                    {"messages_sent", a.messages_sent},
                    {"invitations_listened", a.invitations_listened},
                    {"invitations_ignored", a.invitations_ignored},
                    {"regions_visited", a.regions_visited}};
  }
  return {{"outcome", m.outcome},
          {"steps", m.steps},
          {"aborted", m.aborted},
          {"agents", agents},
          {"messages_sent", m.messages_sent},
          {"messages_listened", m.messages_listened},
          {"messages_ignored", m.messages_ignored},
          {"entities_rescued", m.entities_rescued},
          {"rescued", m.rescued},
          {"entities_manipulated", m.entities_manipulated},
          {"conversations", m.conversations},
          {"conversations_unanswered", m.conversations_unanswered},
          {"mean_conversation_length", m.mean_conversation_length},
          {"survey_means", m.survey_means},
          {"survey_flags", m.survey_flags}};
}

}  // namespace teamsim
