#pragma once

// Ingestion of repository evidence: the canonical JSONL event format, a
// line-oriented git history dump, and CI / review / dependency sidecars.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emergelab/types.hpp"

namespace emergelab::ingest {

using nlohmann::json;

namespace detail {

inline AgentKind parse_kind(const json& v, std::int64_t line) {
  if (!v.is_string()) throw Error(ErrorKind::MalformedLine, "agent kind must be a string", line);
  auto s = v.get<std::string>();
  if (s == "AI") return AgentKind::AI;
  if (s == "HUMAN") return AgentKind::Human;
  throw Error(ErrorKind::MalformedLine, "unknown agent kind " + s, line);
}

inline std::vector<ModuleEdge> parse_edges(const json& v, std::int64_t line) {
  std::vector<ModuleEdge> out;
  if (!v.is_array()) throw Error(ErrorKind::MalformedLine, "edge list must be an array", line);
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw Error(ErrorKind::MalformedLine, "edge must be [from, to]", line);
    out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return out;
}

template <class T>
T get_as(const json& obj, const char* key, std::int64_t line) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::MalformedLine, std::string("bad value for ") + key, line);
  }
}

inline json parse_line(const std::string& text, std::int64_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedLine, e.what(), line);
  }
  if (!obj.is_object()) throw Error(ErrorKind::MalformedLine, "record is not an object", line);
  return obj;
}

// Calls f(json, line) for every non-blank line.
template <class F>
void for_each_record(std::istream& is, F&& f) {
  std::string text;
  std::int64_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    f(parse_line(text, line), line);
  }
}

}  // namespace detail

// One canonical record to an event. Unknown keys are ignored.
inline CommitEvent event_from_json(const json& obj, std::int64_t line = 0) {
  for (const char* key : {"commit_id", "ts", "author", "author_kind", "modules", "ci_passed"})
    if (!obj.contains(key)) throw Error(ErrorKind::MissingRequiredField, key, line);
  CommitEvent e;
  e.commit_id = detail::get_as<std::string>(obj, "commit_id", line);
  e.timestamp = detail::get_as<std::int64_t>(obj, "ts", line);
  e.author = {detail::get_as<std::string>(obj, "author", line), detail::parse_kind(obj["author_kind"], line)};
  e.modules_touched = detail::get_as<std::vector<std::string>>(obj, "modules", line);
  if (!obj["ci_passed"].is_null()) e.ci_passed = detail::get_as<bool>(obj, "ci_passed", line);
  if (obj.contains("deps_added")) e.deps_added = detail::parse_edges(obj["deps_added"], line);
  if (obj.contains("deps_removed")) e.deps_removed = detail::parse_edges(obj["deps_removed"], line);
  if (obj.contains("parents_triggered_by"))
    e.parent_triggers = detail::get_as<std::vector<std::string>>(obj, "parents_triggered_by", line);
  if (obj.contains("messages_to"))
    e.messages_to = detail::get_as<std::vector<std::string>>(obj, "messages_to", line);
  if (obj.contains("reviewer") != obj.contains("review_depth"))
    throw Error(ErrorKind::MissingRequiredField, "reviewer and review_depth come together", line);
  if (obj.contains("reviewer")) {
    Review r;
    r.reviewer.id = detail::get_as<std::string>(obj, "reviewer", line);
    r.reviewer.kind = obj.contains("reviewer_kind") ? detail::parse_kind(obj["reviewer_kind"], line)
                                                    : AgentKind::Human;
    r.depth = detail::get_as<double>(obj, "review_depth", line);
    e.review = r;
  }
  if (obj.contains("quality") && !obj["quality"].is_null())
    e.quality_score = detail::get_as<double>(obj, "quality", line);
  if (obj.contains("complexity_delta") && !obj["complexity_delta"].is_null())
    e.complexity_delta = detail::get_as<double>(obj, "complexity_delta", line);
  if (obj.contains("loc_delta")) e.loc_delta = detail::get_as<std::int64_t>(obj, "loc_delta", line);
  if (obj.contains("rework")) e.required_rework = detail::get_as<bool>(obj, "rework", line);
  return e;
}

inline json event_to_json(const CommitEvent& e) {
  auto edges = [](const std::vector<ModuleEdge>& v) {
    json a = json::array();
    for (const auto& [f, t] : v) a.push_back({f, t});
    return a;
  };
  json o;
  o["commit_id"] = e.commit_id;
  o["ts"] = e.timestamp;
  o["author"] = e.author.id;
  o["author_kind"] = std::string(to_string(e.author.kind));
  o["modules"] = e.modules_touched;
  o["ci_passed"] = e.ci_passed ? json(*e.ci_passed) : json(nullptr);
  if (!e.deps_added.empty()) o["deps_added"] = edges(e.deps_added);
  if (!e.deps_removed.empty()) o["deps_removed"] = edges(e.deps_removed);
  if (!e.parent_triggers.empty()) o["parents_triggered_by"] = e.parent_triggers;
  if (!e.messages_to.empty()) o["messages_to"] = e.messages_to;
  if (e.review) {
    o["reviewer"] = e.review->reviewer.id;
    o["reviewer_kind"] = std::string(to_string(e.review->reviewer.kind));
    o["review_depth"] = e.review->depth;
  }
  if (e.quality_score) o["quality"] = *e.quality_score;
  if (e.complexity_delta) o["complexity_delta"] = *e.complexity_delta;
  o["loc_delta"] = e.loc_delta;
  o["rework"] = e.required_rework;
  return o;
}

inline std::vector<CommitEvent> parse_jsonl(std::istream& is) {
  std::vector<CommitEvent> out;
  detail::for_each_record(is, [&](const json& obj, std::int64_t line) { out.push_back(event_from_json(obj, line)); });
  return out;
}

inline std::vector<CommitEvent> parse_jsonl(std::string_view text) {
  std::istringstream is{std::string(text)};
  return parse_jsonl(is);
}

inline void emit_jsonl(std::ostream& os, std::span<const CommitEvent> events) {
  for (const auto& e : events) os << event_to_json(e).dump() << '\n';
}

// ------------------------------------------------------------- git history

struct GitLogOptions {
  // ECMAScript patterns; an author matching any of them is labelled AI.
  std::vector<std::string> ai_author_patterns;
  // Path segments that make up a module name.
  std::size_t module_depth = 1;
};

// Module of a numstat path. Renames (`a => b`, `dir/{a => b}/f`) resolve to
// the new path; files at the repository root belong to module ".".
inline std::string module_of_path(std::string path, std::size_t depth = 1) {
  auto brace = path.find('{');
  auto arrow = path.find(" => ");
  if (brace != std::string::npos && arrow != std::string::npos && brace < arrow) {
    auto close = path.find('}', arrow);
    if (close != std::string::npos)
      path = path.substr(0, brace) + path.substr(arrow + 4, close - arrow - 4) + path.substr(close + 1);
    std::string cleaned;
    for (std::size_t i = 0; i < path.size(); ++i)
      if (!(path[i] == '/' && !cleaned.empty() && cleaned.back() == '/')) cleaned += path[i];
    path = cleaned;
  } else if (arrow != std::string::npos) {
    path = path.substr(arrow + 4);
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    if (slash == std::string::npos) break;
    if (slash > start) parts.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  if (parts.empty()) return ".";
  std::string module = parts[0];
  for (std::size_t i = 1; i < std::min(depth, parts.size()); ++i) module += "/" + parts[i];
  return module;
}

namespace detail {

inline bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return false;
  std::int64_t v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = s[0] == '-' ? -v : v;
  return true;
}

}  // namespace detail

// Parses `H|<id>|<unix-ts>|<author>` headers each followed by numstat lines
// `<added>\t<deleted>\t<path>`. Binary entries (`-\t-\t...`) are skipped.
// CI, review and quality fields are left empty for merge_evidence.
inline std::vector<CommitEvent> parse_git_log(std::istream& is, const GitLogOptions& opt = {}) {
  std::vector<std::regex> ai;
  for (const auto& p : opt.ai_author_patterns) ai.emplace_back(p, std::regex::ECMAScript);
  std::vector<CommitEvent> out;
  std::set<std::string> modules;
  auto flush = [&] {
    if (out.empty()) return;
    out.back().modules_touched.assign(modules.begin(), modules.end());
    modules.clear();
  };

  std::string text;
  std::int64_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    if (text.rfind("H|", 0) == 0) {
      flush();
      auto p1 = text.find('|', 2);
      auto p2 = p1 == std::string::npos ? p1 : text.find('|', p1 + 1);
      if (p2 == std::string::npos) throw Error(ErrorKind::MalformedHeader, text, line);
      CommitEvent e;
      e.commit_id = text.substr(2, p1 - 2);
      std::int64_t ts;
      if (e.commit_id.empty() || !detail::parse_int(text.substr(p1 + 1, p2 - p1 - 1), ts) || ts < 0)
        throw Error(ErrorKind::MalformedHeader, text, line);
      e.timestamp = ts;
      e.author.id = text.substr(p2 + 1);
      if (e.author.id.empty()) throw Error(ErrorKind::MalformedHeader, "empty author", line);
      e.author.kind = std::any_of(ai.begin(), ai.end(),
                                  [&](const std::regex& r) { return std::regex_search(e.author.id, r); })
                          ? AgentKind::AI
                          : AgentKind::Human;
      out.push_back(std::move(e));
      continue;
    }
    auto t1 = text.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : text.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw Error(ErrorKind::MalformedHeader, "expected header or numstat: " + text, line);
    if (out.empty()) throw Error(ErrorKind::MalformedHeader, "numstat before first header", line);
    auto added = text.substr(0, t1), deleted = text.substr(t1 + 1, t2 - t1 - 1);
    if (added == "-" && deleted == "-") continue;
    std::int64_t a, d;
    if (!detail::parse_int(added, a) || !detail::parse_int(deleted, d) || a < 0 || d < 0)
      throw Error(ErrorKind::NonNumericStat, text, line);
    out.back().loc_delta += a - d;
    modules.insert(module_of_path(text.substr(t2 + 1), opt.module_depth));
  }
  flush();
  return out;
}

// ---------------------------------------------------------------- sidecars

struct CiRecord {
  std::string commit_id;
  bool passed = true;
  std::optional<double> quality;
  std::optional<double> complexity_delta;
  std::optional<bool> rework;
};

struct ReviewRecord {
  std::string commit_id;
  AgentId reviewer;
  double depth = 0.0;
};

inline std::vector<CiRecord> parse_ci_jsonl(std::istream& is) {
  std::vector<CiRecord> out;
  detail::for_each_record(is, [&](const json& o, std::int64_t line) {
    for (const char* key : {"commit_id", "passed"})
      if (!o.contains(key)) throw Error(ErrorKind::MissingRequiredField, key, line);
    CiRecord r;
    r.commit_id = detail::get_as<std::string>(o, "commit_id", line);
    r.passed = detail::get_as<bool>(o, "passed", line);
    if (o.contains("quality")) r.quality = detail::get_as<double>(o, "quality", line);
    if (o.contains("complexity_delta")) r.complexity_delta = detail::get_as<double>(o, "complexity_delta", line);
    if (o.contains("rework")) r.rework = detail::get_as<bool>(o, "rework", line);
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<ReviewRecord> parse_review_jsonl(std::istream& is) {
  std::vector<ReviewRecord> out;
  detail::for_each_record(is, [&](const json& o, std::int64_t line) {
    for (const char* key : {"commit_id", "reviewer", "depth"})
      if (!o.contains(key)) throw Error(ErrorKind::MissingRequiredField, key, line);
    ReviewRecord r;
    r.commit_id = detail::get_as<std::string>(o, "commit_id", line);
    r.reviewer.id = detail::get_as<std::string>(o, "reviewer", line);
    r.reviewer.kind = o.contains("reviewer_kind") ? detail::parse_kind(o["reviewer_kind"], line) : AgentKind::Human;
    r.depth = detail::get_as<double>(o, "depth", line);
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<DependencySnapshot> parse_snapshots_jsonl(std::istream& is) {
  std::vector<DependencySnapshot> out;
  detail::for_each_record(is, [&](const json& o, std::int64_t line) {
    for (const char* key : {"ts", "edges"})
      if (!o.contains(key)) throw Error(ErrorKind::MissingRequiredField, key, line);
    DependencySnapshot s;
    s.timestamp = detail::get_as<std::int64_t>(o, "ts", line);
    s.edges = detail::parse_edges(o["edges"], line);
    for (const auto& [f, t] : s.edges)
      if (f == t) throw Error(ErrorKind::FieldOutOfRange, "self dependency on " + f, line);
    out.push_back(std::move(s));
  });
  return out;
}

inline void emit_snapshots_jsonl(std::ostream& os, std::span<const DependencySnapshot> snaps) {
  for (const auto& s : snaps) {
    json edges = json::array();
    for (const auto& [f, t] : s.edges) edges.push_back({f, t});
    os << json{{"ts", s.timestamp}, {"edges", edges}}.dump() << '\n';
  }
}

struct MergeResult {
  std::vector<CommitEvent> events;  // validated
  std::vector<std::string> unmatched_ci;
  std::vector<std::string> unmatched_reviews;
  std::size_t unattributed_dependency_changes = 0;
};

// Joins sidecar evidence onto git events by commit_id. Dependency changes
// between consecutive snapshots (the first against an empty graph) go to the
// latest commit in (previous ts, snapshot ts]. The result does not depend on
// the order of any input.
inline MergeResult merge_evidence(std::vector<CommitEvent> events, std::vector<CiRecord> ci,
                                  std::vector<ReviewRecord> reviews,
                                  std::vector<DependencySnapshot> snapshots) {
  MergeResult res;
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.commit_id < b.commit_id;
  });
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < events.size(); ++i) index.emplace(events[i].commit_id, i);

  std::map<std::string, CiRecord> ci_by_id;
  for (auto& r : ci) {
    auto [it, inserted] = ci_by_id.emplace(r.commit_id, r);
    if (inserted) continue;
    if (it->second.passed != r.passed)
      throw Error(ErrorKind::ConflictingEvidence, "contradicting CI results for " + r.commit_id);
    auto agree = [&](const auto& a, const auto& b) { return !a || !b || *a == *b; };
    if (!agree(it->second.quality, r.quality) || !agree(it->second.complexity_delta, r.complexity_delta) ||
        !agree(it->second.rework, r.rework))
      throw Error(ErrorKind::ConflictingEvidence, "contradicting CI metadata for " + r.commit_id);
    if (!it->second.quality) it->second.quality = r.quality;
    if (!it->second.complexity_delta) it->second.complexity_delta = r.complexity_delta;
    if (!it->second.rework) it->second.rework = r.rework;
  }
  for (const auto& [id, r] : ci_by_id) {
    auto it = index.find(id);
    if (it == index.end()) {
      res.unmatched_ci.push_back(id);
      continue;
    }
    auto& e = events[it->second];
    e.ci_passed = r.passed;
    if (r.quality) e.quality_score = r.quality;
    if (r.complexity_delta) e.complexity_delta = r.complexity_delta;
    if (r.rework) e.required_rework = *r.rework;
  }

  // Deepest review wins; ties go to the smaller reviewer id.
  std::sort(reviews.begin(), reviews.end(), [](const auto& a, const auto& b) {
    if (a.commit_id != b.commit_id) return a.commit_id < b.commit_id;
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.reviewer.id < b.reviewer.id;
  });
  for (std::size_t k = 0; k < reviews.size(); ++k) {
    if (k > 0 && reviews[k].commit_id == reviews[k - 1].commit_id) continue;
    auto it = index.find(reviews[k].commit_id);
    if (it == index.end()) {
      res.unmatched_reviews.push_back(reviews[k].commit_id);
      continue;
    }
    events[it->second].review = Review{reviews[k].reviewer, reviews[k].depth};
  }

  std::sort(snapshots.begin(), snapshots.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  std::vector<std::set<ModuleEdge>> edge_sets;
  std::vector<std::int64_t> times;
  for (const auto& s : snapshots) {
    std::set<ModuleEdge> edges(s.edges.begin(), s.edges.end());
    if (!times.empty() && times.back() == s.timestamp) {
      if (edges != edge_sets.back())
        throw Error(ErrorKind::ConflictingEvidence, "two snapshots at ts " + std::to_string(s.timestamp));
      continue;
    }
    times.push_back(s.timestamp);
    edge_sets.push_back(std::move(edges));
  }
  std::set<ModuleEdge> prev;
  std::optional<std::int64_t> prev_ts;
  for (std::size_t k = 0; k < edge_sets.size(); ++k) {
    const auto& cur = edge_sets[k];
    std::vector<ModuleEdge> added, removed;
    std::set_difference(cur.begin(), cur.end(), prev.begin(), prev.end(), std::back_inserter(added));
    std::set_difference(prev.begin(), prev.end(), cur.begin(), cur.end(), std::back_inserter(removed));
    if (!added.empty() || !removed.empty()) {
      std::optional<std::size_t> target;
      for (std::size_t i = 0; i < events.size(); ++i) {
        if (events[i].timestamp > times[k]) break;
        if (!prev_ts || events[i].timestamp > *prev_ts) target = i;
      }
      if (target) {
        auto& e = events[*target];
        e.deps_added.insert(e.deps_added.end(), added.begin(), added.end());
        e.deps_removed.insert(e.deps_removed.end(), removed.begin(), removed.end());
      } else {
        res.unattributed_dependency_changes += added.size() + removed.size();
      }
    }
    prev = cur;
    prev_ts = times[k];
  }

  res.events = validate_event_log(std::move(events));
  return res;
}

struct LogSummary {
  std::size_t commits = 0;
  double ai_share = 0.0;
  std::int64_t first_ts = 0;
  std::int64_t last_ts = 0;
};

inline LogSummary summarize(std::span<const CommitEvent> events) {
  LogSummary s;
  s.commits = events.size();
  if (events.empty()) return s;
  std::size_t ai = 0;
  s.first_ts = s.last_ts = events.front().timestamp;
  for (const auto& e : events) {
    ai += e.author.kind == AgentKind::AI;
    s.first_ts = std::min(s.first_ts, e.timestamp);
    s.last_ts = std::max(s.last_ts, e.timestamp);
  }
  s.ai_share = static_cast<double>(ai) / static_cast<double>(events.size());
  return s;
}

}  // namespace emergelab::ingest
