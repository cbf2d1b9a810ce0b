#pragma once

// Topology observables of the dependency graph and trigger-cascade
// extraction from an event log.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "emergelab/types.hpp"

namespace emergelab {

// Global transitivity of the undirected projection:
// 3 * triangles / connected triples, 0 when there are no triples.
inline double clustering_coefficient(const DependencyGraph& g) {
  auto adj = g.undirected_adjacency();
  double closed = 0.0, triples = 0.0;
  for (std::size_t v = 0; v < adj.size(); ++v) {
    double d = static_cast<double>(adj[v].size());
    triples += d * (d - 1.0) / 2.0;
    for (auto a = adj[v].begin(); a != adj[v].end(); ++a)
      for (auto b = std::next(a); b != adj[v].end(); ++b)
        if (adj[*a].count(*b)) closed += 1.0;
  }
  return triples > 0.0 ? closed / triples : 0.0;
}

// Local clustering of node v in the undirected projection.
inline double local_clustering(const std::vector<std::set<std::size_t>>& adj, std::size_t v) {
  const auto& nb = adj[v];
  if (nb.size() < 2) return 0.0;
  double links = 0.0;
  for (auto a = nb.begin(); a != nb.end(); ++a)
    for (auto b = std::next(a); b != nb.end(); ++b)
      if (adj[*a].count(*b)) links += 1.0;
  double d = static_cast<double>(nb.size());
  return links / (d * (d - 1.0) / 2.0);
}

// Directed edge density |E| / (|V| (|V| - 1)).
inline double link_density(const DependencyGraph& g) {
  auto n = static_cast<double>(g.node_count());
  if (g.node_count() < 2) throw Error(ErrorKind::TooFewNodes, "link density needs two nodes");
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

struct Cascade {
  std::string root;
  std::vector<std::string> members;  // in log order, root first
  std::size_t size = 0;
  std::size_t depth = 0;  // longest trigger chain inside the cascade
  std::int64_t start_ts = 0;
  std::int64_t end_ts = 0;
  bool root_failed = false;
};

struct CascadeOptions {
  // Adds inferred edges from a CI-failing commit to later commits touching
  // one of its modules within `horizon` seconds. Off by default.
  bool heuristic_edges = false;
  std::int64_t horizon = 24 * 3600;
};

namespace detail {

struct TriggerDag {
  std::vector<std::vector<std::size_t>> parents;  // indices into the log
};

inline TriggerDag trigger_dag(std::span<const CommitEvent> events, const CascadeOptions& opt) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < events.size(); ++i) index.emplace(events[i].commit_id, i);
  TriggerDag dag;
  dag.parents.resize(events.size());
  for (std::size_t i = 0; i < events.size(); ++i)
    for (const auto& p : events[i].parent_triggers) {
      auto it = index.find(p);
      if (it == index.end() || it->second >= i)
        throw Error(ErrorKind::DanglingTrigger, events[i].commit_id + " <- " + p);
      dag.parents[i].push_back(it->second);
    }
  if (opt.heuristic_edges) {
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (events[i].ci_passed.value_or(true)) continue;
      const auto& broken = events[i].modules_touched;
      for (std::size_t j = i + 1; j < events.size(); ++j) {
        if (events[j].timestamp - events[i].timestamp > opt.horizon) break;
        const auto& mods = events[j].modules_touched;
        bool shared = std::any_of(mods.begin(), mods.end(), [&](const std::string& m) {
          return std::binary_search(broken.begin(), broken.end(), m);
        });
        if (shared) dag.parents[j].push_back(i);
      }
    }
  }
  for (auto& ps : dag.parents) {
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  }
  return dag;
}

}  // namespace detail

// Cascades are the weakly connected components of the trigger DAG; commits
// with no trigger links form size-1 cascades. Expects a validated log.
inline std::vector<Cascade> extract_cascades(std::span<const CommitEvent> events,
                                             const CascadeOptions& opt = {}) {
  auto dag = detail::trigger_dag(events, opt);
  const std::size_t n = events.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (auto p : dag.parents[i]) {
      auto a = find(i), b = find(p);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }

  std::vector<std::size_t> chain(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (auto p : dag.parents[i]) chain[i] = std::max(chain[i], chain[p] + 1);

  std::map<std::size_t, Cascade> by_root;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = find(i);  // smallest index in the component, i.e. earliest commit
    auto& c = by_root[r];
    if (c.members.empty()) {
      c.root = events[r].commit_id;
      c.start_ts = events[r].timestamp;
      c.root_failed = !events[r].ci_passed.value_or(true);
    }
    c.members.push_back(events[i].commit_id);
    c.size += 1;
    c.depth = std::max(c.depth, chain[i]);
    c.end_ts = std::max(c.end_ts, events[i].timestamp);
  }
  std::vector<Cascade> out;
  out.reserve(by_root.size());
  for (auto& [_, c] : by_root) out.push_back(std::move(c));
  return out;
}

// Mean number of direct trigger-children per commit.
inline double fan_out_ratio(std::span<const CommitEvent> events, const CascadeOptions& opt = {}) {
  if (events.empty()) throw Error(ErrorKind::EmptyLog, "fan-out ratio of empty log");
  auto dag = detail::trigger_dag(events, opt);
  std::size_t edges = 0;
  for (const auto& ps : dag.parents) edges += ps.size();
  return static_cast<double>(edges) / static_cast<double>(events.size());
}

inline void write_cascades_csv(std::ostream& os, std::span<const Cascade> cascades) {
  os << "root,size,depth,start_ts,end_ts\n";
  for (const auto& c : cascades)
    os << c.root << ',' << c.size << ',' << c.depth << ',' << c.start_ts << ',' << c.end_ts << '\n';
}

}  // namespace emergelab
