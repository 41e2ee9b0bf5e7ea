#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "teamsim/event_queue.hpp"

using namespace teamsim;

namespace {

Event at(long id, long start, long duration) {
  Event e;
  e.id = id;
  e.start_step = start;
  e.duration_steps = duration;
  e.participants = {"a"};
  return e;
}

}  // namespace

TEST(EventQueue, EqualDueStepsPopInSequenceOrder) {
  EventQueue q;
  q.push(at(0, 0, 5));
  q.push(at(1, 0, 3));
  q.push(at(2, 1, 2));
  std::vector<std::pair<long, long>> order;
  while (auto e = q.pop()) order.emplace_back(e->due, e->seq);
  EXPECT_EQ(order, (std::vector<std::pair<long, long>>{{3, 1}, {3, 2}, {5, 0}}));
}

TEST(EventQueue, EmptyPopIsNone) {
  EventQueue q;
  EXPECT_FALSE(q.pop().has_value());
  EXPECT_EQ(q.peek(), nullptr);
  EXPECT_TRUE(q.empty());
}

TEST(EventQueue, PushUsesDueStepAndId) {
  EventQueue q;
  q.push(at(9, 4, 6));
  ASSERT_NE(q.peek(), nullptr);
  EXPECT_EQ(q.peek()->due, 10);
  EXPECT_EQ(q.peek()->seq, 9);
  EXPECT_EQ(q.peek()->event.due_step(), 10);
}

TEST(EventQueue, ThousandPairsMatchStableSortOracle) {
  std::mt19937_64 rng(1);
  std::vector<std::pair<long, long>> pairs;
  EventQueue q;
  for (long seq = 0; seq < 1000; ++seq) {
    const long due = static_cast<long>(rng() % 40);
    pairs.emplace_back(due, seq);
    q.push(due, seq, at(seq, 0, 1));
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<long, long>> popped;
  while (auto e = q.pop()) popped.emplace_back(e->due, e->seq);
  EXPECT_EQ(popped, pairs);
}

// Interleaved push/pop with monotone clock, the way the engine uses it:
// nothing is scheduled before the current step.
TEST(EventQueue, RandomInterleavingsKeepOrderingProperty) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10000; ++trial) {
    EventQueue q;
    long seq = 0;
    long now = 0;
    long last_due = -1;
    long last_seq = -1;
    const int ops = 5 + static_cast<int>(rng() % 40);
    for (int op = 0; op < ops; ++op) {
      if (rng() % 3 != 0) {
        const long due = now + static_cast<long>(rng() % 6);
        q.push(due, seq++, at(seq, now, std::max(1L, due - now)));
      } else if (auto e = q.pop()) {
        ASSERT_GE(e->due, last_due);
        if (e->due == last_due) ASSERT_GT(e->seq, last_seq);
        last_due = e->due;
        last_seq = e->seq;
        now = std::max(now, e->due);
      }
    }
    while (auto e = q.pop()) {
      ASSERT_GE(e->due, last_due);
      if (e->due == last_due) ASSERT_GT(e->seq, last_seq);
      last_due = e->due;
      last_seq = e->seq;
    }
  }
}
