#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "emergelab/coarse_grain.hpp"
#include "helpers.hpp"

using namespace emergelab;
using testkit::commit;
using testkit::kind_of;

namespace {

constexpr std::int64_t kDay = 86400;

// Newman modularity in the adjacency-matrix form
// Q = 1/(2m) sum_ij (A_ij - k_i k_j / 2m) [c_i == c_j], evaluated directly.
double modularity_oracle(const std::vector<std::vector<int>>& A, const std::vector<int>& community) {
  const std::size_t n = A.size();
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i] += A[i][j], two_m += A[i][j];
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (community[i] == community[j]) q += A[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

DependencyGraph weighted(const std::vector<double>& w) {
  DependencyGraph g;
  for (std::size_t i = 0; i < w.size(); ++i) g.add_node("m" + std::to_string(i), w[i]);
  return g;
}

}  // namespace

TEST(QualityIndex, MeanOfScores) {
  auto a = commit("a", 1), b = commit("b", 2), c = commit("c", 3);
  a.quality_score = 0.8;
  b.quality_score = 0.6;
  EXPECT_NEAR(*quality_index(std::vector<CommitEvent>{a, b, c}), 0.7, 1e-15);
  a.quality_score = 1.0;
  EXPECT_EQ(*quality_index(std::vector<CommitEvent>{a}), 1.0);
  EXPECT_FALSE(quality_index(std::vector<CommitEvent>{}));
  EXPECT_FALSE(quality_index(std::vector<CommitEvent>{c}));
}

TEST(QualityIndex, LiesWithinScoreRange) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<CommitEvent> w;
    double lo = 1, hi = 0;
    for (int i = 0; i < 1 + rep % 9; ++i) {
      auto e = commit("c" + std::to_string(i), i);
      e.quality_score = u(rng);
      lo = std::min(lo, *e.quality_score), hi = std::max(hi, *e.quality_score);
      w.push_back(e);
    }
    double q = *quality_index(w);
    EXPECT_GE(q, lo - 1e-15);
    EXPECT_LE(q, hi + 1e-15);
  }
}

TEST(CouplingDensity, Examples) {
  EXPECT_NEAR(coupling_density(testkit::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}})), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(coupling_density(testkit::graph({"a"}, {})), 0.0);
  EXPECT_EQ(coupling_density(testkit::graph({"a", "b"}, {{"a", "b"}, {"b", "a"}})), 1.0);
  EXPECT_EQ(kind_of([] { coupling_density(DependencyGraph{}); }), ErrorKind::EmptyGraph);
}

TEST(CouplingDensity, AddingAnEdgeNeverDecreasesIt) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, 7);
  auto g = testkit::graph({"a", "b", "c", "d", "e", "f", "g", "h"}, {});
  double prev = coupling_density(g);
  for (int i = 0; i < 80; ++i) {
    auto x = pick(rng), y = pick(rng);
    if (x == y) continue;
    g.add_edge(x, y);
    double c = coupling_density(g);
    EXPECT_GE(c, prev);
    prev = c;
  }
  EXPECT_GT(prev, 1.0);  // normalised by |V|, so it can pass 1
}

TEST(StructuralEntropy, Examples) {
  EXPECT_NEAR(structural_entropy(weighted({5, 5, 5, 5})), 2.0, 1e-15);
  EXPECT_EQ(structural_entropy(weighted({42})), 0.0);
  EXPECT_DOUBLE_EQ(structural_entropy(weighted({2, 1, 1})), 1.5);
  EXPECT_EQ(kind_of([] { structural_entropy(weighted({0, 0})); }), ErrorKind::ZeroTotalWeight);
  EXPECT_EQ(kind_of([] { structural_entropy(weighted({1, -1})); }), ErrorKind::FieldOutOfRange);
}

TEST(StructuralEntropy, BoundedByLogOfModuleCountAndPermutationInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 10);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> w(2 + rep % 12);
    for (auto& v : w) v = rep % 5 == 0 ? 1.0 : u(rng);
    double h = structural_entropy(weighted(w));
    double bound = std::log2(static_cast<double>(w.size()));
    EXPECT_LE(h, bound + 1e-12);
    if (rep % 5 == 0) EXPECT_NEAR(h, bound, 1e-12);
    else EXPECT_LT(h, bound);
    std::shuffle(w.begin(), w.end(), rng);
    EXPECT_NEAR(structural_entropy(weighted(w)), h, 1e-12);
  }
}

TEST(Coherence, TwoDisjointTrianglesAgainstNewmanFormula) {
  auto g = testkit::undirected({"p/a", "p/b", "p/c", "q/a", "q/b", "q/c"},
                               {{"p/a", "p/b"}, {"p/b", "p/c"}, {"p/a", "p/c"},
                                {"q/a", "q/b"}, {"q/b", "q/c"}, {"q/a", "q/c"}});
  std::vector<std::vector<int>> A(6, std::vector<int>(6, 0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) A[i][j] = A[i + 3][j + 3] = 1;
  double oracle = modularity_oracle(A, {0, 0, 0, 1, 1, 1});
  EXPECT_NEAR(oracle, 0.5, 1e-12);
  EXPECT_NEAR(architectural_coherence(g), oracle, 1e-12);
}

TEST(Coherence, CompleteGraphSingleCommunityAndEmptyGraph) {
  std::vector<std::string> names = {"x/a", "x/b", "x/c", "x/d"};
  std::vector<ModuleEdge> all;
  for (auto& a : names)
    for (auto& b : names)
      if (a < b) all.emplace_back(a, b);
  EXPECT_NEAR(architectural_coherence(testkit::undirected(names, all)), 0.0, 1e-12);
  EXPECT_EQ(architectural_coherence(testkit::graph(names, {})), 0.0);
}

TEST(Coherence, RandomGraphsMatchOracle) {
  std::mt19937_64 rng(21);
  std::bernoulli_distribution coin(0.3);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 8;
    std::vector<std::string> names;
    std::vector<int> comm;
    for (int i = 0; i < n; ++i) {
      comm.push_back(i % 3);
      names.push_back("c" + std::to_string(i % 3) + "/m" + std::to_string(i));
    }
    auto g = testkit::graph(names, {});
    std::vector<std::vector<int>> A(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && coin(rng)) {
          g.add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          A[i][j] = A[j][i] = 1;
        }
    if (g.edge_count() == 0) continue;
    EXPECT_NEAR(architectural_coherence(g), modularity_oracle(A, comm), 1e-12);
  }
}

TEST(Coherence, UncoveredNode) {
  auto g = testkit::graph({"a", "b"}, {{"a", "b"}});
  EXPECT_EQ(kind_of([&] { architectural_coherence(g, Partition{{"a", "x"}}); }), ErrorKind::UncoveredNode);
}

TEST(DefectRate, Examples) {
  std::vector<CommitEvent> w;
  for (int i = 0; i < 10; ++i) {
    auto e = commit("c" + std::to_string(i), i);
    e.ci_passed = i >= 2;
    w.push_back(e);
  }
  EXPECT_NEAR(*defect_rate(w), 0.2, 1e-15);
  for (auto& e : w) e.ci_passed = true;
  EXPECT_EQ(*defect_rate(w), 0.0);
  EXPECT_FALSE(defect_rate(std::vector<CommitEvent>{}));
}

TEST(BuildSeries, TenDaysGiveTenWindows) {
  auto s = build_series(validate_event_log({commit("a", 0), commit("b", 10 * kDay - 1)}), {}, {kDay});
  EXPECT_EQ(s.windows.size(), 10u);
  // Windows are half-open, so an event exactly on the boundary opens another.
  s = build_series(validate_event_log({commit("a", 0), commit("b", 10 * kDay)}), {}, {kDay});
  EXPECT_EQ(s.windows.size(), 11u);
  std::vector<CommitEvent> daily;
  for (int d = 0; d < 10; ++d) daily.push_back(commit("d" + std::to_string(d), d * kDay + 3600));
  s = build_series(validate_event_log(daily), {}, {kDay});
  EXPECT_EQ(s.windows.size(), 10u);
  for (const auto& w : s.windows) EXPECT_EQ(w.micro.commits[0], 1);
  for (std::size_t k = 1; k < s.windows.size(); ++k)
    EXPECT_EQ(s.windows[k].macro.t - s.windows[k - 1].macro.t, kDay);
}

TEST(BuildSeries, SilentAgentIsZeroFilledAndGapsAreCarried) {
  std::vector<CommitEvent> log;
  for (int d = 0; d < 5; ++d) {
    auto e = commit("a" + std::to_string(d), d * kDay, "alice");
    e.quality_score = 0.5 + 0.1 * d;
    e.ci_passed = true;
    log.push_back(e);
    if (d != 3) log.push_back(commit("b" + std::to_string(d), d * kDay + 10, "bob"));
  }
  log[0].quality_score.reset();
  auto s = build_series(validate_event_log(log), {}, {kDay});
  ASSERT_EQ(s.windows.size(), 5u);
  ASSERT_EQ(s.roster.size(), 2u);
  EXPECT_EQ(s.windows[3].micro.commits[1], 0);
  EXPECT_EQ(s.windows[3].micro.commits[0], 1);
  EXPECT_TRUE(s.windows[0].macro.q_filled);
  EXPECT_NEAR(*s.windows[0].macro.quality, 0.6, 1e-12);
}

TEST(BuildSeries, InteractionCounting) {
  auto root = commit("r", 10, "alice");
  auto follow = testkit::child("f", 20, {"r"});
  follow.author = {"bob", AgentKind::Human};
  follow.review = Review{{"alice", AgentKind::Human}, 0.8};
  follow.messages_to = {"carol"};
  auto other = commit("o", 30, "carol");
  auto s = build_series(validate_event_log({root, follow, other}), {}, {kDay});
  ASSERT_EQ(s.windows.size(), 1u);
  const auto& m = s.windows[0].micro;
  // roster: alice 0, bob 1, carol 2
  EXPECT_EQ(m.interaction(0, 1), 2);  // alice reviewed bob's commit and triggered it
  EXPECT_EQ(m.interaction(1, 2), 1);  // bob messaged carol
  EXPECT_EQ(m.interaction(1, 0), 0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m.interaction(i, i), 0);
  EXPECT_EQ(m.reviews[0], 1);
}

TEST(BuildSeries, IndependentOfInputOrder) {
  std::vector<CommitEvent> log;
  for (int i = 0; i < 60; ++i) {
    auto e = commit("c" + std::to_string(i), i * 7000, i % 3 ? "alice" : "bob");
    e.modules_touched = {i % 2 ? "core" : "ui/widgets"};
    e.loc_delta = 10 + i;
    if (i % 4 == 0) e.deps_added = {{"ui/widgets", "core"}};
    e.ci_passed = i % 5 != 0;
    log.push_back(e);
  }
  auto ref = build_series(validate_event_log(log), {}, {kDay});
  std::mt19937 rng(2);
  std::shuffle(log.begin(), log.end(), rng);
  auto got = build_series(validate_event_log(log), {}, {kDay});
  ASSERT_EQ(got.windows.size(), ref.windows.size());
  for (std::size_t k = 0; k < ref.windows.size(); ++k) {
    EXPECT_EQ(got.windows[k].micro.commits, ref.windows[k].micro.commits);
    EXPECT_EQ(got.windows[k].macro.entropy, ref.windows[k].macro.entropy);
    EXPECT_EQ(got.windows[k].macro.coupling, ref.windows[k].macro.coupling);
  }
  EXPECT_EQ(ref.windows.size(), static_cast<std::size_t>(std::ceil(59.0 * 7000 / kDay)));
}

TEST(BuildSeries, EmptyLogAndBadDt) {
  EXPECT_EQ(kind_of([] { build_series({}, {}, {kDay}); }), ErrorKind::EmptyLog);
  auto log = validate_event_log({commit("a", 0)});
  EXPECT_EQ(kind_of([&] { build_series(log, {}, {0}); }), ErrorKind::InvalidArgument);
}

TEST(BuildSeries, EntropyColumnMatchesVolumes) {
  auto a = commit("a", 0), b = commit("b", 10), c = commit("c", kDay + 5);
  a.modules_touched = {"x"};
  a.loc_delta = 200;
  b.modules_touched = {"y", "z"};
  b.loc_delta = 200;
  c.modules_touched = {"x"};
  c.loc_delta = -100;
  auto s = build_series(validate_event_log({a, b, c}), {}, {kDay});
  ASSERT_EQ(s.windows.size(), 2u);
  EXPECT_NEAR(s.windows[0].macro.entropy, 1.5, 1e-12);           // x=200, y=100, z=100
  EXPECT_NEAR(s.windows[1].macro.entropy, std::log2(3.0), 1e-12);  // x=100 after the removal
}
