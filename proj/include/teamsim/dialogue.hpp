#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace teamsim {

namespace llm {
class CompletionBackend;
}

inline constexpr int kDefaultMaxTurns = 8;
inline constexpr long kInvitationTtl = 5;
inline constexpr double kRedundancyThreshold = 0.8;

struct TranscriptEntry {
  long step = 0;
  std::string speaker;
  std::string text;
  bool operator==(const TranscriptEntry&) const = default;
};

enum class ConversationState { Pending, Open, Closed };

// Pending while invitations are outstanding. participants[0] is the
// initiator; invitees join participants once they listen.
struct Conversation {
  long id = -1;
  std::vector<std::string> participants;
  std::vector<std::string> invited;  // not yet answered
  std::vector<TranscriptEntry> transcript;
  ConversationState state = ConversationState::Pending;
  std::string close_reason;
  int max_turns = kDefaultMaxTurns;
  long started_step = 0;
  bool end_marker = false;

  const std::string& initiator() const { return participants.front(); }
  bool operator==(const Conversation&) const = default;
};

// The opening message is the first transcript entry. Throws NoTargets.
Conversation start_conversation(long id, const std::string& initiator, const std::vector<std::string>& targets,
                                const std::string& opening, long step, int max_turns = kDefaultMaxTurns);

// Records an invitee's listen/ignore answer. Once every invitee has answered
// the conversation opens, or closes "unanswered" when nobody listened.
void answer_invitation(Conversation& c, const std::string& invitee, bool listened);

// Token-set Jaccard similarity over lower-cased alphanumeric tokens; 1 when
// both are empty.
double jaccard(std::string_view a, std::string_view b);

class SpeakerSelector {
 public:
  virtual ~SpeakerSelector() = default;
  virtual std::optional<std::string> choose(const Conversation& c) = 0;
};

// Asks a completion backend (purpose speaker) to name the next speaker from
// the candidates line of its prompt.
class AdapterSpeakerSelector final : public SpeakerSelector {
 public:
  explicit AdapterSpeakerSelector(llm::CompletionBackend& backend) : backend_(backend) {}
  std::optional<std::string> choose(const Conversation& c) override;

 private:
  llm::CompletionBackend& backend_;
};

struct SpeakerChoice {
  std::string speaker;
  std::optional<std::string> warning;
};

// A participant named in the last message, else round-robin after the last
// speaker. A selector may override with any participant other than the last
// speaker; anything else is replaced by the rule-based choice and warned.
SpeakerChoice select_next_speaker(const Conversation& c, SpeakerSelector* selector = nullptr);

// "max_turns", "redundant" or "ended".
std::optional<std::string> should_terminate(const Conversation& c);

}  // namespace teamsim
