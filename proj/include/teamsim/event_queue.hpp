#pragma once

#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "teamsim/agent.hpp"

namespace teamsim {

enum class EventKind { Action, Communication };

struct Event {
  long id = -1;  // monotone sequence number
  EventKind kind = EventKind::Action;
  std::optional<ActionPayload> action;
  long start_step = 0;
  long duration_steps = 1;
  std::vector<std::string> participants;
  std::string context;
  long conversation = -1;  // Communication only

  long due_step() const { return start_step + duration_steps; }
  bool operator==(const Event&) const = default;
};

struct QueuedEvent {
  long due = 0;
  long seq = 0;
  Event event;
};

// Min-heap on (due, seq): equal due steps pop in insertion order.
class EventQueue {
 public:
  void push(long due, long seq, Event e) { heap_.push({due, seq, std::move(e)}); }
  void push(Event e) {
    const long due = e.due_step();
    const long seq = e.id;
    push(due, seq, std::move(e));
  }

  std::optional<QueuedEvent> pop() {
    if (heap_.empty()) return std::nullopt;
    QueuedEvent top = heap_.top();
    heap_.pop();
    return top;
  }

  const QueuedEvent* peek() const { return heap_.empty() ? nullptr : &heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
      return a.due != b.due ? a.due > b.due : a.seq > b.seq;
    }
  };
  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, Later> heap_;
};

}  // namespace teamsim
