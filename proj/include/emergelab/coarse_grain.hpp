#pragma once

// Coarse-graining: the macro observables Q, C, A, E, D and the per-window
// micro vectors, assembled into a fixed-step StateSeries.

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "emergelab/detail/csv.hpp"
#include "emergelab/graph_metrics.hpp"
#include "emergelab/types.hpp"

namespace emergelab {

// Equal-weight mean of the window's quality scores; commits without a score
// are skipped. Empty when no commit in the window carries one.
inline std::optional<double> quality_index(std::span<const CommitEvent> window) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& e : window)
    if (e.quality_score) sum += *e.quality_score, ++n;
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

// Dependent ordered pairs divided by |V|. Not bounded by 1.
inline double coupling_density(const DependencyGraph& g) {
  if (g.node_count() == 0) throw Error(ErrorKind::EmptyGraph, "coupling of empty graph");
  return static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
}

// Shannon entropy (bits) of the code-volume distribution over modules.
inline double structural_entropy(const DependencyGraph& g) {
  double total = 0.0;
  for (double w : g.weights()) {
    if (w < 0.0) throw Error(ErrorKind::FieldOutOfRange, "negative module weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroTotalWeight, "no code volume");
  double h = 0.0;
  for (double w : g.weights())
    if (w > 0.0) {
      double p = w / total;
      h -= p * std::log2(p);
    }
  return h;
}

using Partition = std::map<std::string, std::string>;

// Community of a module is its name up to the first '/'.
inline Partition directory_partition(const DependencyGraph& g) {
  Partition p;
  for (const auto& name : g.nodes()) p[name] = name.substr(0, name.find('/'));
  return p;
}

// Newman modularity of the undirected projection under `partition`:
// sum over communities of (L_c / m - (d_c / 2m)^2). Zero for an edgeless graph.
inline double architectural_coherence(const DependencyGraph& g, const Partition& partition) {
  std::vector<const std::string*> community(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    auto it = partition.find(g.name(i));
    if (it == partition.end()) throw Error(ErrorKind::UncoveredNode, g.name(i));
    community[i] = &it->second;
  }
  auto adj = g.undirected_adjacency();
  double m = 0.0;
  for (const auto& nb : adj) m += static_cast<double>(nb.size());
  m /= 2.0;
  if (m == 0.0) return 0.0;
  std::map<std::string, double> inside, degree;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    degree[*community[i]] += static_cast<double>(adj[i].size());
    for (auto j : adj[i])
      if (i < j && *community[i] == *community[j]) inside[*community[i]] += 1.0;
  }
  double q = 0.0;
  for (const auto& [c, d] : degree) {
    double frac = d / (2.0 * m);
    q += inside[c] / m - frac * frac;
  }
  return q;
}

inline double architectural_coherence(const DependencyGraph& g) {
  return architectural_coherence(g, directory_partition(g));
}

// Share of commits with CI results that failed. Empty when none report CI.
inline std::optional<double> defect_rate(std::span<const CommitEvent> window) {
  std::size_t failed = 0, total = 0;
  for (const auto& e : window)
    if (e.ci_passed) {
      ++total;
      if (!*e.ci_passed) ++failed;
    }
  if (total == 0) return std::nullopt;
  return static_cast<double>(failed) / static_cast<double>(total);
}

struct SeriesOptions {
  std::int64_t dt = 86400;
  // Pin the tiling instead of deriving it from the first/last timestamp.
  std::optional<std::int64_t> start;
  std::optional<std::size_t> window_count;
};

namespace detail {

// Replays module volume and dependency edits in log order.
class GraphReplay {
 public:
  void apply(const CommitEvent& e) {
    for (const auto& m : e.modules_touched) graph_.add_node(m);
    if (!e.modules_touched.empty()) {
      double share = static_cast<double>(e.loc_delta) / static_cast<double>(e.modules_touched.size());
      for (const auto& m : e.modules_touched) {
        auto i = graph_.index_of(m);
        graph_.set_weight(i, std::max(0.0, graph_.weight(i) + share));
      }
    }
    for (const auto& [from, to] : e.deps_added) {
      graph_.add_node(from);
      graph_.add_node(to);
      graph_.add_edge(from, to);
    }
    for (const auto& [from, to] : e.deps_removed) graph_.remove_edge(from, to);
  }

  const DependencyGraph& graph() const { return graph_; }

 private:
  DependencyGraph graph_;
};

inline double entropy_or_zero(const DependencyGraph& g) {
  try {
    return structural_entropy(g);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ZeroTotalWeight) return 0.0;
    throw;
  }
}

}  // namespace detail

// Dependency graph in force at time `t`: replayed nodes and volumes, with the
// edge set of the latest snapshot at or before `t` when snapshots are given.
inline DependencyGraph graph_at(const DependencyGraph& replayed,
                                std::span<const DependencySnapshot> snapshots, std::int64_t t) {
  if (snapshots.empty()) return replayed;
  DependencyGraph g;
  for (std::size_t i = 0; i < replayed.node_count(); ++i) g.add_node(replayed.name(i), replayed.weight(i));
  const DependencySnapshot* current = nullptr;
  for (const auto& s : snapshots)
    if (s.timestamp <= t) current = &s;
  if (current)
    for (const auto& [from, to] : current->edges) {
      g.add_node(from);
      g.add_node(to);
      g.add_edge(from, to);
    }
  g.snapshot_time = t;
  return g;
}

// Tiles the log into windows of `dt` seconds and computes m(t) and M(t) for
// each. Window k covers [start + k dt, start + (k+1) dt); the last window also
// takes events at its closing edge. Q and D gaps are carried forward (or back,
// for leading gaps) and flagged. Expects a validated log.
inline StateSeries build_series(std::span<const CommitEvent> events,
                                std::span<const DependencySnapshot> snapshots,
                                const SeriesOptions& opt) {
  if (events.empty()) throw Error(ErrorKind::EmptyLog, "cannot build a series from an empty log");
  if (opt.dt <= 0) throw Error(ErrorKind::InvalidArgument, "dt must be positive");

  std::vector<DependencySnapshot> snaps(snapshots.begin(), snapshots.end());
  std::stable_sort(snaps.begin(), snaps.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  StateSeries s;
  s.dt = opt.dt;
  s.start = opt.start.value_or(events.front().timestamp);
  std::size_t count;
  if (opt.window_count) {
    count = *opt.window_count;
  } else {
    // Half-open windows [start + k dt, start + (k+1) dt) up to the one
    // holding the last event.
    auto span = events.back().timestamp - s.start;
    count = static_cast<std::size_t>(std::max<std::int64_t>(0, span) / opt.dt + 1);
  }
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "window count must be positive");
  s.roster = roster_of(events);

  std::unordered_map<std::string, std::size_t> agent;
  for (std::size_t i = 0; i < s.roster.size(); ++i) agent.emplace(s.roster[i].id, i);
  std::unordered_map<std::string, std::size_t> author_of;
  const std::size_t n = s.roster.size();

  detail::GraphReplay replay;
  std::size_t next = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::int64_t end = s.start + static_cast<std::int64_t>(k + 1) * opt.dt;
    const bool last = k + 1 == count;
    std::size_t first = next;
    while (next < events.size() && (events[next].timestamp < end || last)) {
      if (events[next].timestamp < s.start) {
        throw Error(ErrorKind::InvalidArgument, "event before series start: " + events[next].commit_id);
      }
      if (last && events[next].timestamp > end) break;
      ++next;
    }
    std::span<const CommitEvent> win = events.subspan(first, next - first);

    Window w;
    w.micro = MicroState::zeros(end, n);
    auto& m = w.micro;
    for (const auto& e : win) {
      replay.apply(e);
      auto a = agent.at(e.author.id);
      author_of[e.commit_id] = a;
      m.commits[a] += 1;
      if (e.ci_passed) (*e.ci_passed ? m.tests_passed : m.tests_failed)[a] += 1;
      if (e.review) {
        auto r = agent.at(e.review->reviewer.id);
        m.reviews[r] += 1;
        if (r != a) m.comm[r * n + a] += 1;
      }
      for (const auto& p : e.parent_triggers) {
        auto it = author_of.find(p);
        if (it != author_of.end() && it->second != a) m.comm[it->second * n + a] += 1;
      }
      for (const auto& target : e.messages_to) {
        auto it = agent.find(target);
        if (it != agent.end() && it->second != a) m.comm[a * n + it->second] += 1;
      }
    }

    auto g = graph_at(replay.graph(), snaps, end);
    auto& M = w.macro;
    M.t = end;
    M.quality = quality_index(win);
    M.defect_rate = defect_rate(win);
    M.coupling = g.node_count() ? coupling_density(g) : 0.0;
    M.coherence = architectural_coherence(g);
    M.entropy = detail::entropy_or_zero(g);
    s.windows.push_back(std::move(w));
  }
  if (next != events.size())
    throw Error(ErrorKind::InvalidArgument, "events extend past the last window");

  auto fill = [&](auto value, auto flag) {
    std::optional<double> prev;
    for (auto& w : s.windows) {
      auto& v = w.macro.*value;
      if (v) prev = v;
      else if (prev) v = prev, w.macro.*flag = true;
    }
    std::optional<double> first;
    for (auto& w : s.windows)
      if ((w.macro.*value) && !(w.macro.*flag)) {
        first = w.macro.*value;
        break;
      }
    for (auto& w : s.windows) {
      if (w.macro.*value) break;
      w.macro.*value = first;
      if (first) w.macro.*flag = true;
    }
  };
  fill(&MacroState::quality, &MacroState::q_filled);
  fill(&MacroState::defect_rate, &MacroState::d_filled);
  return s;
}

// Per-agent micro features used for EI: activity (commits + reviews), failed
// tests, and the communication tensor's out- and in-marginals.
inline constexpr std::size_t kFeaturesPerAgent = 4;

inline std::vector<double> micro_features(const MicroState& m) {
  std::vector<double> f;
  f.reserve(m.agents() * kFeaturesPerAgent);
  for (std::size_t i = 0; i < m.agents(); ++i) {
    f.push_back(static_cast<double>(m.commits[i] + m.reviews[i]));
    f.push_back(static_cast<double>(m.tests_failed[i]));
    f.push_back(static_cast<double>(m.out_degree(i)));
    f.push_back(static_cast<double>(m.in_degree(i)));
  }
  return f;
}

inline std::vector<double> macro_vector(const MacroState& M) {
  auto nan = std::numeric_limits<double>::quiet_NaN();
  return {M.quality.value_or(nan), M.coupling, M.coherence, M.entropy, M.defect_rate.value_or(nan)};
}

// ------------------------------------------------------------------ CSV I/O

inline std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Columns: t,Q,C,A,E,D,q_filled,d_filled then, per agent, c:<id> r:<id>
// tp:<id> tf:<id> out:<id> in:<id>.
inline void write_series_csv(std::ostream& os, const StateSeries& s) {
  std::vector<std::string> header{"t", "Q", "C", "A", "E", "D", "q_filled", "d_filled"};
  for (const auto& a : s.roster)
    for (const char* p : {"c:", "r:", "tp:", "tf:", "out:", "in:"}) header.push_back(p + a.id);
  csv::write_row(os, header);
  for (const auto& w : s.windows) {
    auto x = macro_vector(w.macro);
    std::vector<std::string> row{std::to_string(w.macro.t)};
    for (double v : x) row.push_back(format_double(v));
    row.push_back(w.macro.q_filled ? "1" : "0");
    row.push_back(w.macro.d_filled ? "1" : "0");
    const auto& m = w.micro;
    for (std::size_t i = 0; i < m.agents(); ++i) {
      row.push_back(std::to_string(m.commits[i]));
      row.push_back(std::to_string(m.reviews[i]));
      row.push_back(std::to_string(m.tests_passed[i]));
      row.push_back(std::to_string(m.tests_failed[i]));
      row.push_back(std::to_string(m.out_degree(i)));
      row.push_back(std::to_string(m.in_degree(i)));
    }
    csv::write_row(os, row);
  }
}

// Nonzero tensor entries as t,row,col,count.
inline void write_tensor_csv(std::ostream& os, const StateSeries& s) {
  csv::write_row(os, {"t", "row", "col", "count"});
  for (const auto& w : s.windows) {
    const auto& m = w.micro;
    for (std::size_t i = 0; i < m.agents(); ++i)
      for (std::size_t j = 0; j < m.agents(); ++j)
        if (auto c = m.interaction(i, j))
          csv::write_row(os, {std::to_string(m.t), s.roster[i].id, s.roster[j].id, std::to_string(c)});
  }
}

// What a series CSV carries back in: macro vectors and EI micro features.
struct SeriesTable {
  std::vector<std::int64_t> t;
  std::vector<std::vector<double>> macro;  // Q, C, A, E, D (NaN for NA)
  std::vector<std::vector<double>> micro;  // kFeaturesPerAgent values per agent
  std::vector<std::string> agents;
};

inline SeriesTable read_series_csv(std::istream& is) {
  auto table = csv::read(is);
  SeriesTable out;
  for (const char* col : {"t", "Q", "C", "A", "E", "D"})
    if (table.column(col) < 0)
      throw Error(ErrorKind::MissingRequiredField, std::string("series column ") + col);
  std::vector<std::ptrdiff_t> act, tf, o, in, r;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const auto& h = table.header[i];
    if (h.rfind("c:", 0) == 0) {
      auto id = h.substr(2);
      out.agents.push_back(id);
      act.push_back(static_cast<std::ptrdiff_t>(i));
      r.push_back(table.column("r:" + id));
      tf.push_back(table.column("tf:" + id));
      o.push_back(table.column("out:" + id));
      in.push_back(table.column("in:" + id));
      if (r.back() < 0 || tf.back() < 0 || o.back() < 0 || in.back() < 0)
        throw Error(ErrorKind::MissingRequiredField, "incomplete micro columns for agent " + id);
    }
  }
  std::int64_t line = 1;
  for (const auto& row : table.rows) {
    ++line;
    out.t.push_back(static_cast<std::int64_t>(csv::parse_double(row[table.column("t")], line)));
    std::vector<double> M;
    for (const char* col : {"Q", "C", "A", "E", "D"})
      M.push_back(csv::parse_double(row[table.column(col)], line));
    out.macro.push_back(std::move(M));
    std::vector<double> f;
    for (std::size_t a = 0; a < act.size(); ++a) {
      f.push_back(csv::parse_double(row[act[a]], line) + csv::parse_double(row[r[a]], line));
      f.push_back(csv::parse_double(row[tf[a]], line));
      f.push_back(csv::parse_double(row[o[a]], line));
      f.push_back(csv::parse_double(row[in[a]], line));
    }
    out.micro.push_back(std::move(f));
  }
  return out;
}

}  // namespace emergelab
