#pragma once

// Domain types shared by every stage of the pipeline: commit events, the
// per-window micro and macro states, and the module dependency graph.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "emergelab/error.hpp"

namespace emergelab {

enum class AgentKind { AI, Human };

inline std::string_view to_string(AgentKind k) { return k == AgentKind::AI ? "AI" : "HUMAN"; }

struct AgentId {
  std::string id;
  AgentKind kind = AgentKind::Human;

  friend bool operator==(const AgentId&, const AgentId&) = default;
};

using ModuleEdge = std::pair<std::string, std::string>;

struct Review {
  AgentId reviewer;
  double depth = 0.0;  // in [0,1]

  friend bool operator==(const Review&, const Review&) = default;
};

// One atomic ecosystem action. Optional fields are absent when the evidence
// source did not supply them (e.g. git history without CI records).
struct CommitEvent {
  std::string commit_id;
  std::int64_t timestamp = 0;
  AgentId author;
  std::vector<std::string> modules_touched;  // sorted, unique after validation
  std::vector<ModuleEdge> deps_added;
  std::vector<ModuleEdge> deps_removed;
  std::vector<std::string> parent_triggers;
  std::vector<std::string> messages_to;  // agent ids receiving an explicit message
  std::optional<bool> ci_passed;
  bool required_rework = false;
  std::optional<Review> review;
  std::optional<double> quality_score;
  std::optional<double> complexity_delta;
  std::int64_t loc_delta = 0;

  friend bool operator==(const CommitEvent&, const CommitEvent&) = default;
};

// Sorts by (timestamp, commit_id) and checks every dataset invariant.
// Idempotent; throws Error on the first violation found.
inline std::vector<CommitEvent> validate_event_log(std::vector<CommitEvent> events) {
  auto out_of_range = [](const CommitEvent& e, const std::string& what) {
    return Error(ErrorKind::FieldOutOfRange, "commit " + e.commit_id + ": " + what);
  };

  std::unordered_set<std::string> ids;
  std::unordered_map<std::string, AgentKind> kinds;
  auto check_kind = [&](const CommitEvent& e, const AgentId& a) {
    if (a.id.empty()) throw out_of_range(e, "empty agent id");
    auto [it, inserted] = kinds.emplace(a.id, a.kind);
    if (!inserted && it->second != a.kind)
      throw out_of_range(e, "agent " + a.id + " changes kind within the dataset");
  };

  for (auto& e : events) {
    if (e.commit_id.empty()) throw Error(ErrorKind::FieldOutOfRange, "empty commit_id");
    if (!ids.insert(e.commit_id).second) throw Error(ErrorKind::DuplicateId, e.commit_id);
    check_kind(e, e.author);
    if (e.quality_score && !(*e.quality_score >= 0.0 && *e.quality_score <= 1.0))
      throw out_of_range(e, "quality_score outside [0,1]");
    if (e.review) {
      check_kind(e, e.review->reviewer);
      if (!(e.review->depth >= 0.0 && e.review->depth <= 1.0))
        throw out_of_range(e, "review depth outside [0,1]");
    }
    for (const auto* deps : {&e.deps_added, &e.deps_removed})
      for (const auto& [from, to] : *deps) {
        if (from.empty() || to.empty()) throw out_of_range(e, "empty module name in dependency");
        if (from == to) throw out_of_range(e, "self dependency on " + from);
      }
    for (const auto& m : e.modules_touched)
      if (m.empty()) throw out_of_range(e, "empty module name");
    std::sort(e.modules_touched.begin(), e.modules_touched.end());
    e.modules_touched.erase(std::unique(e.modules_touched.begin(), e.modules_touched.end()),
                            e.modules_touched.end());
  }

  std::stable_sort(events.begin(), events.end(), [](const CommitEvent& a, const CommitEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.commit_id < b.commit_id;
  });

  std::unordered_set<std::string> seen;
  for (const auto& e : events) {
    for (const auto& p : e.parent_triggers)
      if (!seen.count(p))
        throw Error(ErrorKind::DanglingTrigger,
                    "commit " + e.commit_id + " triggered by unknown or later commit " + p);
    seen.insert(e.commit_id);
  }
  return events;
}

// Authors and reviewers ordered by id. Kinds are taken from first appearance.
inline std::vector<AgentId> roster_of(std::span<const CommitEvent> events) {
  std::map<std::string, AgentKind> agents;
  for (const auto& e : events) {
    agents.emplace(e.author.id, e.author.kind);
    if (e.review) agents.emplace(e.review->reviewer.id, e.review->reviewer.kind);
  }
  std::vector<AgentId> out;
  out.reserve(agents.size());
  for (const auto& [id, kind] : agents) out.push_back({id, kind});
  return out;
}

// Time-stamped module dependency digraph. Nodes keep insertion order; edges
// have multiplicity one and never loop.
class DependencyGraph {
 public:
  std::int64_t snapshot_time = 0;

  std::size_t add_node(const std::string& name, double weight = 0.0) {
    auto [it, inserted] = index_.emplace(name, names_.size());
    if (inserted) {
      names_.push_back(name);
      weights_.push_back(weight);
      out_.emplace_back();
      in_.emplace_back();
    }
    return it->second;
  }

  bool has_node(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::FieldOutOfRange, "unknown module " + name);
    return it->second;
  }

  // Returns false if the edge already existed.
  bool add_edge(const std::string& from, const std::string& to) {
    return add_edge(index_of(from), index_of(to));
  }

  bool add_edge(std::size_t from, std::size_t to) {
    if (from == to) throw Error(ErrorKind::FieldOutOfRange, "self dependency on " + names_[from]);
    if (!out_[from].insert(to).second) return false;
    in_[to].insert(from);
    ++edge_count_;
    return true;
  }

  bool remove_edge(const std::string& from, const std::string& to) {
    if (!has_node(from) || !has_node(to)) return false;
    auto f = index_of(from), t = index_of(to);
    if (!out_[f].erase(t)) return false;
    in_[t].erase(f);
    --edge_count_;
    return true;
  }

  bool has_edge(std::size_t from, std::size_t to) const { return out_[from].count(to) != 0; }

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::vector<std::string>& nodes() const { return names_; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::set<std::size_t>& successors(std::size_t i) const { return out_[i]; }
  const std::set<std::size_t>& predecessors(std::size_t i) const { return in_[i]; }

  double weight(std::size_t i) const { return weights_[i]; }
  void set_weight(std::size_t i, double w) { weights_[i] = w; }
  const std::vector<double>& weights() const { return weights_; }

  std::vector<std::pair<std::size_t, std::size_t>> edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edge_count_);
    for (std::size_t i = 0; i < out_.size(); ++i)
      for (auto j : out_[i]) out.emplace_back(i, j);
    return out;
  }

  // Neighbor sets of the undirected projection.
  std::vector<std::set<std::size_t>> undirected_adjacency() const {
    std::vector<std::set<std::size_t>> adj(names_.size());
    for (std::size_t i = 0; i < out_.size(); ++i)
      for (auto j : out_[i]) {
        adj[i].insert(j);
        adj[j].insert(i);
      }
    return adj;
  }

 private:
  std::vector<std::string> names_;
  std::vector<double> weights_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::set<std::size_t>> out_;
  std::vector<std::set<std::size_t>> in_;
  std::size_t edge_count_ = 0;
};

// Module dependency edge set observed at one point in time.
struct DependencySnapshot {
  std::int64_t timestamp = 0;
  std::vector<ModuleEdge> edges;
};

// Micro state m(t) over one window. The communication tensor is stored
// row-major: comm[i * N + j] counts interactions directed from agent i to j.
struct MicroState {
  std::int64_t t = 0;
  std::vector<std::int64_t> commits;
  std::vector<std::int64_t> reviews;
  std::vector<std::int64_t> tests_passed;
  std::vector<std::int64_t> tests_failed;
  std::vector<std::int64_t> comm;

  std::size_t agents() const { return commits.size(); }
  std::int64_t interaction(std::size_t from, std::size_t to) const {
    return comm[from * agents() + to];
  }
  std::int64_t out_degree(std::size_t i) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < agents(); ++j) s += interaction(i, j);
    return s;
  }
  std::int64_t in_degree(std::size_t j) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < agents(); ++i) s += interaction(i, j);
    return s;
  }

  static MicroState zeros(std::int64_t t, std::size_t n) {
    MicroState m;
    m.t = t;
    m.commits.assign(n, 0);
    m.reviews.assign(n, 0);
    m.tests_passed.assign(n, 0);
    m.tests_failed.assign(n, 0);
    m.comm.assign(n * n, 0);
    return m;
  }
};

// Macro state M(t) = (Q, C, A, E, D). Q and D are empty when the window has
// no data and no earlier value exists to carry forward.
struct MacroState {
  std::int64_t t = 0;
  std::optional<double> quality;
  double coupling = 0.0;
  double coherence = 0.0;
  double entropy = 0.0;
  std::optional<double> defect_rate;
  bool q_filled = false;
  bool d_filled = false;
};

struct Window {
  MicroState micro;
  MacroState macro;
};

struct StateSeries {
  std::int64_t dt = 0;
  std::int64_t start = 0;  // start time of the first window
  std::vector<AgentId> roster;
  std::vector<Window> windows;
};

}  // namespace emergelab
