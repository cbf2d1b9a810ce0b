#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "emergelab/error.hpp"
#include "emergelab/types.hpp"

namespace testkit {

// Kind of the emergelab::Error thrown by f; fails the test if nothing is thrown.
inline emergelab::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const emergelab::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return emergelab::ErrorKind::Io;
}

inline emergelab::CommitEvent commit(std::string id, std::int64_t ts, std::string author = "alice",
                                     emergelab::AgentKind kind = emergelab::AgentKind::Human) {
  emergelab::CommitEvent e;
  e.commit_id = std::move(id);
  e.timestamp = ts;
  e.author = {std::move(author), kind};
  e.modules_touched = {"core"};
  return e;
}

inline emergelab::CommitEvent child(std::string id, std::int64_t ts, std::vector<std::string> parents) {
  auto e = commit(std::move(id), ts);
  e.parent_triggers = std::move(parents);
  return e;
}

inline emergelab::DependencyGraph graph(std::vector<std::string> nodes, std::vector<emergelab::ModuleEdge> edges) {
  emergelab::DependencyGraph g;
  for (const auto& n : nodes) g.add_node(n, 1.0);
  for (const auto& [a, b] : edges) g.add_edge(a, b);
  return g;
}

// Both directions, for undirected fixtures.
inline emergelab::DependencyGraph undirected(std::vector<std::string> nodes,
                                             std::vector<emergelab::ModuleEdge> edges) {
  auto g = graph(std::move(nodes), {});
  for (const auto& [a, b] : edges) g.add_edge(a, b), g.add_edge(b, a);
  return g;
}

}  // namespace testkit
