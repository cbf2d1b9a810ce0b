#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emergelab/ingest.hpp"
#include "emergelab/rng.hpp"
#include "helpers.hpp"

using namespace emergelab;
using testkit::kind_of;

namespace {

const char* kFullLine =
    R"({"commit_id":"c1","ts":100,"author":"bot-1","author_kind":"AI","modules":["core","ui"],)"
    R"("ci_passed":false,"deps_added":[["ui","core"]],"reviewer":"rev","review_depth":0.4,)"
    R"("quality":0.7,"complexity_delta":2.5,"loc_delta":12,"rework":true,"extra":"ignored"})";

std::vector<CommitEvent> git(const std::string& text, ingest::GitLogOptions opt = {}) {
  std::istringstream is(text);
  return ingest::parse_git_log(is, opt);
}

// A log exercising every optional field, with triggers that always point back.
std::vector<CommitEvent> random_log(std::size_t n, std::uint64_t seed) {
  Rng rng = substream(seed, "fixture");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> mods = {"core", "ui", "net", "db", "docs"};
  std::vector<CommitEvent> out;
  for (std::size_t i = 0; i < n; ++i) {
    bool ai = u(rng) < 0.4;
    auto e = testkit::commit("k" + std::to_string(i), static_cast<std::int64_t>(i / 2), (ai ? "bot" : "dev") + std::to_string(i % 7),
                             ai ? AgentKind::AI : AgentKind::Human);
    e.modules_touched = {mods[i % 5]};
    if (u(rng) < 0.5) e.modules_touched.push_back(mods[(i + 2) % 5]);
    if (u(rng) < 0.7) e.ci_passed = u(rng) < 0.8;
    if (u(rng) < 0.3) e.deps_added = {{mods[i % 5], mods[(i + 1) % 5]}};
    if (u(rng) < 0.1) e.deps_removed = {{mods[(i + 3) % 5], mods[i % 5]}};
    if (i > 0 && u(rng) < 0.3) e.parent_triggers = {"k" + std::to_string(i - 1 - (i >= 3 ? i % 3 : 0))};
    if (u(rng) < 0.2) e.messages_to = {"dev" + std::to_string((i + 1) % 7)};
    if (u(rng) < 0.5) e.review = Review{{"rev" + std::to_string(i % 3), AgentKind::Human}, std::round(u(rng) * 100) / 100};
    if (u(rng) < 0.6) e.quality_score = u(rng);
    if (u(rng) < 0.6) e.complexity_delta = (u(rng) - 0.3) * 10.0;
    e.required_rework = u(rng) < 0.1;
    e.loc_delta = static_cast<std::int64_t>(u(rng) * 400) - 100;
    out.push_back(e);
  }
  return validate_event_log(out);
}

}  // namespace

TEST(ParseJsonl, OneLineWithEveryField) {
  auto events = ingest::parse_jsonl(std::string(kFullLine) + "\n");
  ASSERT_EQ(events.size(), 1u);
  const auto& e = events[0];
  EXPECT_EQ(e.commit_id, "c1");
  EXPECT_EQ(e.timestamp, 100);
  EXPECT_EQ(e.author.kind, AgentKind::AI);
  EXPECT_EQ(e.modules_touched, (std::vector<std::string>{"core", "ui"}));
  EXPECT_EQ(e.ci_passed, std::optional<bool>(false));
  ASSERT_EQ(e.deps_added.size(), 1u);
  EXPECT_EQ(e.deps_added[0], ModuleEdge("ui", "core"));
  ASSERT_TRUE(e.review);
  EXPECT_DOUBLE_EQ(e.review->depth, 0.4);
  EXPECT_EQ(e.quality_score, std::optional<double>(0.7));
  EXPECT_EQ(e.loc_delta, 12);
  EXPECT_TRUE(e.required_rework);
}

TEST(ParseJsonl, EmptyInput) {
  EXPECT_TRUE(ingest::parse_jsonl("").empty());
  EXPECT_TRUE(ingest::parse_jsonl("\n  \n").empty());
}

TEST(ParseJsonl, MissingCommitId) {
  std::string line = R"({"ts":1,"author":"a","author_kind":"HUMAN","modules":[],"ci_passed":null})";
  EXPECT_EQ(kind_of([&] { ingest::parse_jsonl(line); }), ErrorKind::MissingRequiredField);
}

TEST(ParseJsonl, MalformedLineCarriesLineNumber) {
  std::string text = std::string(kFullLine) + "\n\n{not json\n";
  try {
    ingest::parse_jsonl(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedLine);
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(ParseJsonl, RoundTripThousandCommits) {
  auto log = random_log(1000, 11);
  std::ostringstream os;
  ingest::emit_jsonl(os, log);
  auto back = ingest::parse_jsonl(os.str());
  ASSERT_EQ(back.size(), 1000u);
  EXPECT_EQ(back, log);
  EXPECT_EQ(validate_event_log(back), log);
}

TEST(ParseGitLog, NumstatArithmetic) {
  auto ev = git("H|abc|1700000000|alice\n6\t2\tcore/x.rs\n4\t0\tcore/x.rs\n");
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].loc_delta, 8);
  EXPECT_EQ(ev[0].modules_touched, std::vector<std::string>{"core"});
  EXPECT_EQ(ev[0].author.kind, AgentKind::Human);
  EXPECT_FALSE(ev[0].ci_passed);
}

TEST(ParseGitLog, BinaryEntriesSkipped) {
  auto ev = git("H|abc|5|alice\n-\t-\tbinary.png\n3\t1\tsrc/a.c\n");
  EXPECT_EQ(ev[0].loc_delta, 2);
  EXPECT_EQ(ev[0].modules_touched, std::vector<std::string>{"src"});
}

TEST(ParseGitLog, NonNumericTimestamp) {
  EXPECT_EQ(kind_of([] { git("H|abc|yesterday|alice\n"); }), ErrorKind::MalformedHeader);
  EXPECT_EQ(kind_of([] { git("H|abc\n"); }), ErrorKind::MalformedHeader);
}

TEST(ParseGitLog, NonNumericStat) {
  EXPECT_EQ(kind_of([] { git("H|abc|5|alice\nx\t1\tsrc/a.c\n"); }), ErrorKind::NonNumericStat);
}

TEST(ParseGitLog, AiPatternsAndRootModule) {
  ingest::GitLogOptions opt;
  opt.ai_author_patterns = {"\\[bot\\]$"};
  auto ev = git("H|a|1|dependabot[bot]\n1\t0\tREADME.md\nH|b|2|carol\n", opt);
  EXPECT_EQ(ev[0].author.kind, AgentKind::AI);
  EXPECT_EQ(ev[0].modules_touched, std::vector<std::string>{"."});
  EXPECT_EQ(ev[1].author.kind, AgentKind::Human);
}

TEST(ModuleOfPath, RenamesResolveToNewPath) {
  EXPECT_EQ(ingest::module_of_path("old/a.c => new/a.c"), "new");
  EXPECT_EQ(ingest::module_of_path("src/{old => new}/a.c", 2), "src/new");
  EXPECT_EQ(ingest::module_of_path("{lib => src}/a.c"), "src");
  EXPECT_EQ(ingest::module_of_path("a/b/c/d.h", 2), "a/b");
}

TEST(ParseGitLog, FiftyCommitFixture) {
  std::ifstream log(EMERGELAB_FIXTURES "/git_log_50.txt");
  std::ifstream want(EMERGELAB_FIXTURES "/git_log_50.expected.json");
  ASSERT_TRUE(log && want);
  auto events = ingest::parse_git_log(log);
  auto expected = nlohmann::json::parse(want);
  ASSERT_EQ(events.size(), 50u);
  ASSERT_EQ(expected.size(), 50u);
  std::int64_t total = 0, want_total = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(events[i].commit_id, expected[i]["commit_id"].get<std::string>());
    EXPECT_EQ(events[i].timestamp, expected[i]["ts"].get<std::int64_t>());
    EXPECT_EQ(events[i].loc_delta, expected[i]["loc_delta"].get<std::int64_t>()) << events[i].commit_id;
    EXPECT_EQ(events[i].modules_touched, expected[i]["modules"].get<std::vector<std::string>>());
    total += events[i].loc_delta;
    want_total += expected[i]["loc_delta"].get<std::int64_t>();
  }
  EXPECT_EQ(total, want_total);
}

// ------------------------------------------------------------------ merge

namespace {

std::vector<CommitEvent> three_commits() {
  return {testkit::commit("a", 10), testkit::commit("b", 20), testkit::commit("c", 30)};
}

}  // namespace

TEST(MergeEvidence, CiJoin) {
  ingest::CiRecord ci{"b", false, 0.6, std::nullopt, std::nullopt};
  auto res = ingest::merge_evidence(three_commits(), {ci}, {}, {});
  EXPECT_EQ(res.events[1].ci_passed, std::optional<bool>(false));
  EXPECT_EQ(res.events[1].quality_score, std::optional<double>(0.6));
  EXPECT_FALSE(res.events[0].ci_passed);
}

TEST(MergeEvidence, SnapshotDifferenceGoesToIntervening) {
  DependencySnapshot s1{15, {{"x", "y"}}};
  DependencySnapshot s2{25, {{"x", "y"}, {"a", "b"}}};
  auto res = ingest::merge_evidence(three_commits(), {}, {}, {s1, s2});
  EXPECT_EQ(res.events[0].deps_added, (std::vector<ModuleEdge>{{"x", "y"}}));
  EXPECT_EQ(res.events[1].deps_added, (std::vector<ModuleEdge>{{"a", "b"}}));
  EXPECT_TRUE(res.events[2].deps_added.empty());
}

TEST(MergeEvidence, OppositeCiOutcomesConflict) {
  ingest::CiRecord pass{"a", true, {}, {}, {}}, fail{"a", false, {}, {}, {}};
  EXPECT_EQ(kind_of([&] { ingest::merge_evidence(three_commits(), {pass, fail}, {}, {}); }),
            ErrorKind::ConflictingEvidence);
}

TEST(MergeEvidence, UnmatchedRecordsReported) {
  ingest::CiRecord ci{"zzz", true, {}, {}, {}};
  ingest::ReviewRecord rv{"yyy", {"r", AgentKind::Human}, 0.5};
  auto res = ingest::merge_evidence(three_commits(), {ci}, {rv}, {});
  EXPECT_EQ(res.unmatched_ci, std::vector<std::string>{"zzz"});
  EXPECT_EQ(res.unmatched_reviews, std::vector<std::string>{"yyy"});
}

TEST(MergeEvidence, IndependentOfSourceOrder) {
  std::vector<CommitEvent> events;
  std::vector<ingest::CiRecord> ci;
  std::vector<ingest::ReviewRecord> reviews;
  std::vector<DependencySnapshot> snaps;
  for (int i = 0; i < 30; ++i) {
    events.push_back(testkit::commit("c" + std::to_string(i), i * 10));
    if (i % 2) ci.push_back({"c" + std::to_string(i), i % 3 != 0, 0.5, std::nullopt, std::nullopt});
    if (i % 3 == 0) {
      reviews.push_back({"c" + std::to_string(i), {"r1", AgentKind::Human}, 0.3});
      reviews.push_back({"c" + std::to_string(i), {"r2", AgentKind::Human}, 0.3});
    }
    if (i % 5 == 4) {
      DependencySnapshot s{i * 10 + 5, {}};
      for (int k = 0; k <= i / 5; ++k) s.edges.emplace_back("m" + std::to_string(k), "m" + std::to_string(k + 1));
      snaps.push_back(s);
    }
  }
  auto ref = ingest::merge_evidence(events, ci, reviews, snaps);
  EXPECT_EQ(ref.events[0].review->reviewer.id, "r1");
  std::mt19937 rng(3);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(events.begin(), events.end(), rng);
    std::shuffle(ci.begin(), ci.end(), rng);
    std::shuffle(reviews.begin(), reviews.end(), rng);
    std::shuffle(snaps.begin(), snaps.end(), rng);
    auto got = ingest::merge_evidence(events, ci, reviews, snaps);
    EXPECT_EQ(got.events, ref.events);
  }
}

TEST(Summarize, CountsAndShare) {
  auto log = three_commits();
  log[0].author = {"bot", AgentKind::AI};
  auto s = ingest::summarize(log);
  EXPECT_EQ(s.commits, 3u);
  EXPECT_NEAR(s.ai_share, 1.0 / 3.0, 1e-12);
  EXPECT_EQ(s.first_ts, 10);
  EXPECT_EQ(s.last_ts, 30);
}
