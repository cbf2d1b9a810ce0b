#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "emergelab/types.hpp"
#include "helpers.hpp"

using namespace emergelab;
using testkit::child;
using testkit::commit;
using testkit::kind_of;

TEST(ValidateEventLog, SortsOutOfOrderEvents) {
  auto out = validate_event_log({commit("c", 30), commit("a", 10), commit("b", 20)});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].commit_id, "a");
  EXPECT_EQ(out[1].commit_id, "b");
  EXPECT_EQ(out[2].commit_id, "c");
}

TEST(ValidateEventLog, TiesBreakOnCommitId) {
  auto out = validate_event_log({commit("z", 5), commit("m", 5), commit("a", 9)});
  EXPECT_EQ(out[0].commit_id, "m");
  EXPECT_EQ(out[1].commit_id, "z");
}

TEST(ValidateEventLog, QualityOutsideUnitIntervalIsRejected) {
  auto e = commit("a", 1);
  e.quality_score = 1.5;
  EXPECT_EQ(kind_of([&] { validate_event_log({e}); }), ErrorKind::FieldOutOfRange);
}

TEST(ValidateEventLog, ReviewDepthOutOfRange) {
  auto e = commit("a", 1);
  e.review = Review{{"bob", AgentKind::Human}, -0.1};
  EXPECT_EQ(kind_of([&] { validate_event_log({e}); }), ErrorKind::FieldOutOfRange);
}

TEST(ValidateEventLog, TriggerNamingALaterCommitDangles) {
  EXPECT_EQ(kind_of([&] { validate_event_log({child("a", 1, {"b"}), commit("b", 2)}); }),
            ErrorKind::DanglingTrigger);
  EXPECT_EQ(kind_of([&] { validate_event_log({child("a", 1, {"ghost"})}); }), ErrorKind::DanglingTrigger);
}

TEST(ValidateEventLog, DuplicateIds) {
  EXPECT_EQ(kind_of([&] { validate_event_log({commit("a", 1), commit("a", 2)}); }), ErrorKind::DuplicateId);
}

TEST(ValidateEventLog, AgentKindCannotChange) {
  auto a = commit("a", 1, "bot", AgentKind::AI);
  auto b = commit("b", 2, "bot", AgentKind::Human);
  EXPECT_EQ(kind_of([&] { validate_event_log({a, b}); }), ErrorKind::FieldOutOfRange);
}

TEST(ValidateEventLog, SelfDependencyRejected) {
  auto e = commit("a", 1);
  e.deps_added = {{"x", "x"}};
  EXPECT_EQ(kind_of([&] { validate_event_log({e}); }), ErrorKind::FieldOutOfRange);
}

TEST(ValidateEventLog, ModulesAreSortedAndDeduplicated) {
  auto e = commit("a", 1);
  e.modules_touched = {"ui", "core", "ui"};
  auto out = validate_event_log({e});
  EXPECT_EQ(out[0].modules_touched, (std::vector<std::string>{"core", "ui"}));
}

TEST(ValidateEventLog, IdempotentAndOrderIndependent) {
  std::vector<CommitEvent> log;
  for (int i = 0; i < 40; ++i) {
    auto e = commit("c" + std::to_string(i), i / 3, i % 2 ? "bot" : "alice", i % 2 ? AgentKind::AI : AgentKind::Human);
    if (i >= 3 && i % 4 == 0) e.parent_triggers = {"c" + std::to_string(i - 3)};
    log.push_back(e);
  }
  auto once = validate_event_log(log);
  EXPECT_EQ(validate_event_log(once), once);

  std::mt19937 rng(7);
  for (int k = 0; k < 5; ++k) {
    auto shuffled = log;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(validate_event_log(shuffled), once);
  }
}

TEST(Roster, AuthorsAndReviewersById) {
  auto a = commit("a", 1, "zed");
  a.review = Review{{"amy", AgentKind::AI}, 0.5};
  auto r = roster_of(std::vector<CommitEvent>{a, commit("b", 2, "bob")});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].id, "amy");
  EXPECT_EQ(r[0].kind, AgentKind::AI);
  EXPECT_EQ(r[2].id, "zed");
}

TEST(DependencyGraph, NoSelfLoopsNoMultiEdges) {
  DependencyGraph g;
  g.add_node("a");
  g.add_node("b");
  EXPECT_TRUE(g.add_edge("a", "b"));
  EXPECT_FALSE(g.add_edge("a", "b"));
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_TRUE(g.remove_edge("a", "b"));
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(MicroState, DegreesFromTensor) {
  auto m = MicroState::zeros(0, 3);
  m.comm[0 * 3 + 1] = 2;
  m.comm[2 * 3 + 1] = 1;
  EXPECT_EQ(m.out_degree(0), 2);
  EXPECT_EQ(m.in_degree(1), 3);
  EXPECT_EQ(m.interaction(2, 1), 1);
}
