#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "emergelab/graph_metrics.hpp"
#include "helpers.hpp"

using namespace emergelab;
using testkit::child;
using testkit::commit;
using testkit::kind_of;

TEST(Clustering, Examples) {
  EXPECT_EQ(clustering_coefficient(testkit::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"c", "a"}})), 1.0);
  EXPECT_EQ(clustering_coefficient(testkit::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}})), 0.0);
  // K4 minus (c,d): triangles abc, abd; connected triples 3+3+1+1 = 8.
  auto k4e = testkit::graph({"a", "b", "c", "d"}, {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}});
  EXPECT_DOUBLE_EQ(clustering_coefficient(k4e), 0.75);
}

TEST(Clustering, DirectionIsIgnored) {
  auto one = testkit::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  auto both = testkit::undirected({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  EXPECT_EQ(clustering_coefficient(one), clustering_coefficient(both));
}

TEST(LinkDensity, Examples) {
  auto full = testkit::undirected({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}});
  EXPECT_EQ(link_density(full), 1.0);
  EXPECT_EQ(link_density(testkit::graph({"a", "b", "c"}, {})), 0.0);
  EXPECT_NEAR(link_density(testkit::graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}})), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(kind_of([] { link_density(testkit::graph({"a"}, {})); }), ErrorKind::TooFewNodes);
}

TEST(GraphMetrics, InvariantUnderRelabeling) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.25);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 12;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && coin(rng)) edges.emplace_back(i, j);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DependencyGraph g, h;
    for (std::size_t i = 0; i < n; ++i) {
      g.add_node("n" + std::to_string(i));
      h.add_node("n" + std::to_string(i));
    }
    for (auto [a, b] : edges) {
      g.add_edge(a, b);
      h.add_edge(perm[a], perm[b]);
    }
    EXPECT_NEAR(clustering_coefficient(g), clustering_coefficient(h), 1e-12);
    EXPECT_EQ(link_density(g), link_density(h));
  }
}

TEST(LinkDensity, ConvergesOnRandomGraphs) {
  std::mt19937_64 rng(200);
  for (double p : {0.05, 0.2, 0.5}) {
    std::bernoulli_distribution coin(p);
    DependencyGraph g;
    for (int i = 0; i < 200; ++i) g.add_node("v" + std::to_string(i));
    for (std::size_t i = 0; i < 200; ++i)
      for (std::size_t j = 0; j < 200; ++j)
        if (i != j && coin(rng)) g.add_edge(i, j);
    EXPECT_NEAR(link_density(g), p, 0.02);
  }
}

TEST(Cascades, Chain) {
  auto c = extract_cascades(validate_event_log({commit("A", 1), child("B", 2, {"A"}), child("C", 3, {"B"})}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].size, 3u);
  EXPECT_EQ(c[0].depth, 2u);
  EXPECT_EQ(c[0].root, "A");
  EXPECT_EQ(c[0].start_ts, 1);
  EXPECT_EQ(c[0].end_ts, 3);
}

TEST(Cascades, NoTriggers) {
  std::vector<CommitEvent> log;
  for (int i = 0; i < 5; ++i) log.push_back(commit("c" + std::to_string(i), i));
  auto c = extract_cascades(validate_event_log(log));
  ASSERT_EQ(c.size(), 5u);
  for (const auto& x : c) {
    EXPECT_EQ(x.size, 1u);
    EXPECT_EQ(x.depth, 0u);
  }
  EXPECT_EQ(fan_out_ratio(log), 0.0);
}

TEST(Cascades, Star) {
  auto root = commit("r", 1);
  root.ci_passed = false;
  std::vector<CommitEvent> log = {root, child("x", 2, {"r"}), child("y", 3, {"r"}), child("z", 4, {"r"})};
  auto c = extract_cascades(log);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].size, 4u);
  EXPECT_EQ(c[0].depth, 1u);
  EXPECT_TRUE(c[0].root_failed);
  EXPECT_DOUBLE_EQ(fan_out_ratio(log), 0.75);
}

TEST(FanOut, Chain) {
  std::vector<CommitEvent> log = {commit("A", 1), child("B", 2, {"A"}), child("C", 3, {"B"})};
  EXPECT_NEAR(fan_out_ratio(log), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(kind_of([] { fan_out_ratio(std::vector<CommitEvent>{}); }), ErrorKind::EmptyLog);
}

TEST(Cascades, HeuristicEdgesAreOptIn) {
  auto bad = commit("a", 0);
  bad.ci_passed = false;
  auto later = commit("b", 100);
  auto far = commit("c", 200000);
  std::vector<CommitEvent> log = {bad, later, far};
  EXPECT_EQ(extract_cascades(log).size(), 3u);
  CascadeOptions opt;
  opt.heuristic_edges = true;
  auto c = extract_cascades(log, opt);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].size, 2u);
}

TEST(Cascades, PartitionTheLog) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<CommitEvent> log;
    const int n = 20 + rep;
    for (int i = 0; i < n; ++i) {
      auto e = commit("c" + std::to_string(1000 + i), i);
      std::uniform_int_distribution<int> k(0, 2);
      int links = i ? k(rng) : 0;
      for (int l = 0; l < links; ++l) {
        std::uniform_int_distribution<int> p(std::max(0, i - 6), i - 1);
        e.parent_triggers.push_back("c" + std::to_string(1000 + p(rng)));
      }
      std::sort(e.parent_triggers.begin(), e.parent_triggers.end());
      e.parent_triggers.erase(std::unique(e.parent_triggers.begin(), e.parent_triggers.end()), e.parent_triggers.end());
      log.push_back(e);
    }
    auto cascades = extract_cascades(log);
    std::size_t total = 0;
    std::multiset<std::string> seen;
    for (const auto& c : cascades) {
      total += c.size;
      EXPECT_EQ(c.members.size(), c.size);
      EXPECT_EQ(c.members.front(), c.root);
      EXPECT_LE(c.depth + 1, c.size);
      seen.insert(c.members.begin(), c.members.end());
    }
    EXPECT_EQ(total, log.size());
    for (const auto& e : log) EXPECT_EQ(seen.count(e.commit_id), 1u);
    // Linked commits share a cascade.
    std::map<std::string, std::size_t> where;
    for (std::size_t k = 0; k < cascades.size(); ++k)
      for (const auto& m : cascades[k].members) where[m] = k;
    for (const auto& e : log)
      for (const auto& p : e.parent_triggers) EXPECT_EQ(where[p], where[e.commit_id]);
  }
}
