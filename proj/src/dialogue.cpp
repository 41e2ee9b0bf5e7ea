#include "teamsim/dialogue.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "teamsim/error.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/memory.hpp"

namespace teamsim {

Conversation start_conversation(long id, const std::string& initiator, const std::vector<std::string>& targets,
                                const std::string& opening, long step, int max_turns) {
  if (targets.empty()) throw NoTargets("conversation needs at least one target");
  Conversation c;
  c.id = id;
  c.participants = {initiator};
  for (const auto& t : targets) {
    if (t != initiator && std::find(c.invited.begin(), c.invited.end(), t) == c.invited.end()) c.invited.push_back(t);
  }
  if (c.invited.empty()) throw NoTargets("conversation needs a target other than the initiator");
  c.transcript.push_back({step, initiator, opening});
  c.max_turns = std::max(1, max_turns);
  c.started_step = step;
  return c;
}

void answer_invitation(Conversation& c, const std::string& invitee, bool listened) {
  auto it = std::find(c.invited.begin(), c.invited.end(), invitee);
  if (it == c.invited.end()) return;
  c.invited.erase(it);
  if (listened) c.participants.push_back(invitee);
  if (!c.invited.empty()) return;
  if (c.participants.size() < 2) {
    c.state = ConversationState::Closed;
    c.close_reason = "unanswered";
  } else {
    c.state = ConversationState::Open;
  }
}

double jaccard(std::string_view a, std::string_view b) {
  const auto ta = tokenize(a);
  const auto tb = tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

std::optional<std::string> AdapterSpeakerSelector::choose(const Conversation& c) {
  std::string candidates;
  const auto& last = c.transcript.back().speaker;
  for (const auto& p : c.participants) {
    if (p == last) continue;
    candidates += (candidates.empty() ? "" : ", ") + p;
  }
  llm::CompletionRequest req;
  req.tag = llm::Purpose::Speaker;
  req.max_reply_chars = 200;
  req.system = "Predict who speaks next in this conversation. Reply with one participant name only.";
  req.user = "[transcript]\n";
  for (const auto& e : c.transcript) req.user += e.speaker + ": " + e.text + "\n";
  req.user += "candidates: " + candidates + "\n";
  auto text = backend_.complete(req).text;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::nullopt;
  const auto last_ch = text.find_last_not_of(" \t\r\n.");
  return text.substr(first, last_ch - first + 1);
}

namespace {

// Participant (other than the last speaker) whose name occurs earliest in the
// last message as a whole word.
std::optional<std::string> addressed(const Conversation& c) {
  const auto& last = c.transcript.back();
  std::optional<std::string> best;
  std::size_t best_pos = std::string::npos;
  auto word_char = [](char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'; };
  for (const auto& p : c.participants) {
    if (p == last.speaker || p.empty()) continue;
    for (auto pos = last.text.find(p); pos != std::string::npos; pos = last.text.find(p, pos + 1)) {
      const bool left = pos == 0 || !word_char(last.text[pos - 1]);
      const auto end = pos + p.size();
      const bool right = end >= last.text.size() || !word_char(last.text[end]);
      if (left && right) {
        if (pos < best_pos) {
          best_pos = pos;
          best = p;
        }
        break;
      }
    }
  }
  return best;
}

std::string round_robin(const Conversation& c) {
  const auto& last = c.transcript.back().speaker;
  auto it = std::find(c.participants.begin(), c.participants.end(), last);
  std::size_t i = it == c.participants.end() ? 0 : static_cast<std::size_t>(it - c.participants.begin());
  for (std::size_t n = 1; n <= c.participants.size(); ++n) {
    const auto& p = c.participants[(i + n) % c.participants.size()];
    if (p != last) return p;
  }
  return c.participants.front();
}

}  // namespace

SpeakerChoice select_next_speaker(const Conversation& c, SpeakerSelector* selector) {
  SpeakerChoice rule{addressed(c).value_or(round_robin(c)), std::nullopt};
  if (!selector) return rule;
  std::optional<std::string> proposal;
  try {
    proposal = selector->choose(c);
  } catch (const Error& e) {
    rule.warning = std::string("speaker selector failed: ") + e.what();
    return rule;
  }
  if (!proposal) return rule;
  const auto& last = c.transcript.back().speaker;
  const bool member = std::find(c.participants.begin(), c.participants.end(), *proposal) != c.participants.end();
  if (!member || *proposal == last) {
    rule.warning = "speaker selector proposed '" + *proposal + "'; using '" + rule.speaker + "'";
    return rule;
  }
  return {*proposal, std::nullopt};
}

std::optional<std::string> should_terminate(const Conversation& c) {
  if (c.end_marker) return "ended";
  const auto n = c.transcript.size();
  if (static_cast<int>(n) >= c.max_turns) return "max_turns";
  if (n >= 2) {
    const auto& speaker = c.transcript[n - 1].speaker;
    const auto& before = c.transcript[n - 2].speaker;
    for (std::size_t j = n - 2; j >= 1; --j) {
      if (c.transcript[j].speaker == speaker && c.transcript[j - 1].speaker == before) {
        if (jaccard(c.transcript[n - 1].text, c.transcript[j].text) >= kRedundancyThreshold) return "redundant";
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace teamsim
