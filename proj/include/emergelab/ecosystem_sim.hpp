#pragma once

// Agent-based generator of synthetic ecosystems. One step is one day-long
// measurement window. Every agent makes one root commit per step; failing
// commits spawn trigger-children through a branching process whose offspring
// mean grows with the density and clustering of the dependency graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emergelab/graph_metrics.hpp"
#include "emergelab/rng.hpp"
#include "emergelab/stats.hpp"
#include "emergelab/types.hpp"

namespace emergelab::sim {

inline constexpr std::int64_t kStepSeconds = 86400;

enum class Offspring { Geometric, PowerLaw };

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t n_ai = 4;
  std::size_t n_human = 4;
  std::size_t steps = 120;
  std::size_t modules_init = 12;
  std::size_t areas = 3;
  double branching_ratio = 0.5;   // b
  double ambiguity = 0.6;         // epsilon
  double drift = 0.002;           // delta, per step
  double review_capacity = 1.5;   // kappa
  double review_floor = 0.5;      // rho_min
  std::size_t governance_period = 20;
  double adaptivity = 0.5;        // lambda
  double pref_attach = 1.0;       // gamma
  double capability_growth = 0.0005;

  // Secondary mechanics.
  double base_capability = 0.75;
  double human_defect = 0.1;      // human defect probability per unit ambiguity
  double ci_detect = 0.5;
  double semantic_catch = 0.9;
  double conflict_rate = 0.2;    // per same-module pair per step, per unit ambiguity
  double violation_base = 0.05;
  double violation_gain = 0.5;
  double novelty_rate = 0.3;
  double integration_rate = 0.2;  // per novel module of another agent, per unit ambiguity
  double gate_friction = 1.0;
  double gate_rework = 0.5;
  double quality_base = 0.9;
  double quality_penalty = 0.2;
  double loc_growth = 20.0;       // mean net lines per root commit
  double initial_loc = 200.0;     // lines per initial module
  double init_density = 0.1;
  double init_triangle_share = 0.5;
  double cascade_density_weight = 10.0;
  double cascade_clustering_weight = 5.0;
  double cascade_density_ref = 0.1;     // topology at which the offspring mean is b
  double cascade_clustering_ref = 0.4;
  std::size_t max_cascade_depth = 8;
  std::size_t max_cascade_size = 100;
  Offspring offspring = Offspring::Geometric;
  double offspring_alpha = 2.5;
  double message_rate = 0.2;
  double affinity_sd = 1.0;
  double complexity_sd = 1.0;
  double ai_complexity_shift = 0.5;  // per unit ambiguity

  double ratio() const { return static_cast<double>(n_ai) / static_cast<double>(n_human); }
};

inline void validate(const SimConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) bad(std::string(name) + " must lie in [0,1]");
  };
  auto nonneg = [&](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) bad(std::string(name) + " must be >= 0");
  };
  if (c.n_human < 1) bad("n_human must be >= 1");
  if (c.modules_init < 2) bad("modules_init must be >= 2");
  if (c.areas < 1 || c.areas > c.modules_init) bad("areas must lie in [1, modules_init]");
  if (c.governance_period < 1) bad("governance_period must be >= 1");
  unit(c.ambiguity, "ambiguity");
  unit(c.adaptivity, "adaptivity");
  unit(c.review_floor, "review_floor");
  unit(c.base_capability, "base_capability");
  unit(c.human_defect, "human_defect");
  unit(c.ci_detect, "ci_detect");
  unit(c.semantic_catch, "semantic_catch");
  unit(c.conflict_rate, "conflict_rate");
  unit(c.novelty_rate, "novelty_rate");
  unit(c.gate_rework, "gate_rework");
  unit(c.quality_base, "quality_base");
  unit(c.init_density, "init_density");
  unit(c.init_triangle_share, "init_triangle_share");
  unit(c.message_rate, "message_rate");
  for (auto [v, name] : {std::pair{c.branching_ratio, "branching_ratio"}, {c.drift, "drift"},
                         {c.review_capacity, "review_capacity"}, {c.pref_attach, "pref_attach"},
                         {c.capability_growth, "capability_growth"}, {c.violation_base, "violation_base"},
                         {c.integration_rate, "integration_rate"},
                         {c.violation_gain, "violation_gain"}, {c.gate_friction, "gate_friction"},
                         {c.quality_penalty, "quality_penalty"}, {c.loc_growth, "loc_growth"},
                         {c.initial_loc, "initial_loc"}, {c.cascade_density_weight, "cascade_density_weight"},
                         {c.cascade_clustering_weight, "cascade_clustering_weight"},
                         {c.cascade_density_ref, "cascade_density_ref"},
                         {c.cascade_clustering_ref, "cascade_clustering_ref"},
                         {c.affinity_sd, "affinity_sd"}, {c.complexity_sd, "complexity_sd"},
                         {c.ai_complexity_shift, "ai_complexity_shift"}})
    nonneg(v, name);
  if (c.initial_loc <= 0.0) bad("initial_loc must be positive");
  if (!(c.offspring_alpha > 1.0)) bad("offspring_alpha must exceed 1");
}

// ------------------------------------------------------------ config files

namespace detail {

template <class F>
void for_each_field(SimConfig& c, F&& f) {
  f("seed", c.seed);
  f("n_ai", c.n_ai);
  f("n_human", c.n_human);
  f("steps", c.steps);
  f("modules_init", c.modules_init);
  f("areas", c.areas);
  f("branching_ratio", c.branching_ratio);
  f("ambiguity", c.ambiguity);
  f("drift", c.drift);
  f("review_capacity", c.review_capacity);
  f("review_floor", c.review_floor);
  f("governance_period", c.governance_period);
  f("adaptivity", c.adaptivity);
  f("pref_attach", c.pref_attach);
  f("capability_growth", c.capability_growth);
  f("base_capability", c.base_capability);
  f("human_defect", c.human_defect);
  f("ci_detect", c.ci_detect);
  f("semantic_catch", c.semantic_catch);
  f("conflict_rate", c.conflict_rate);
  f("integration_rate", c.integration_rate);
  f("violation_base", c.violation_base);
  f("violation_gain", c.violation_gain);
  f("novelty_rate", c.novelty_rate);
  f("gate_friction", c.gate_friction);
  f("gate_rework", c.gate_rework);
  f("quality_base", c.quality_base);
  f("quality_penalty", c.quality_penalty);
  f("loc_growth", c.loc_growth);
  f("initial_loc", c.initial_loc);
  f("init_density", c.init_density);
  f("init_triangle_share", c.init_triangle_share);
  f("cascade_density_weight", c.cascade_density_weight);
  f("cascade_clustering_weight", c.cascade_clustering_weight);
  f("cascade_density_ref", c.cascade_density_ref);
  f("cascade_clustering_ref", c.cascade_clustering_ref);
  f("max_cascade_depth", c.max_cascade_depth);
  f("max_cascade_size", c.max_cascade_size);
  f("offspring", c.offspring);
  f("offspring_alpha", c.offspring_alpha);
  f("message_rate", c.message_rate);
  f("affinity_sd", c.affinity_sd);
  f("complexity_sd", c.complexity_sd);
  f("ai_complexity_shift", c.ai_complexity_shift);
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat `key = value` text. Blank lines, `#`/`;` comments and `[section]`
// headers are ignored; unknown keys are an error. Fields not named keep the
// values already in `base`.
inline SimConfig parse_config(std::istream& is, SimConfig base = {}) {
  std::string text;
  std::int64_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    auto hash = text.find_first_of("#;");
    if (hash != std::string::npos) text.resize(hash);
    text = detail::trim(text);
    if (text.empty() || text.front() == '[') continue;
    auto eq = text.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::MalformedLine, "expected key = value", line);
    auto key = detail::trim(text.substr(0, eq));
    auto value = detail::trim(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    bool found = false;
    detail::for_each_field(base, [&](const char* name, auto& field) {
      if (key != name) return;
      found = true;
      using T = std::decay_t<decltype(field)>;
      try {
        std::size_t used = 0;
        if constexpr (std::is_same_v<T, Offspring>) {
          if (value == "geometric") field = Offspring::Geometric;
          else if (value == "powerlaw") field = Offspring::PowerLaw;
          else throw std::invalid_argument(value);
          used = value.size();
        } else if constexpr (std::is_floating_point_v<T>) {
          field = std::stod(value, &used);
        } else {
          if (!value.empty() && value.front() == '-') throw std::invalid_argument(value);
          field = static_cast<T>(std::stoull(value, &used));
        }
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw Error(ErrorKind::MalformedLine, "bad value for " + key + ": " + value, line);
      }
    });
    if (!found) throw Error(ErrorKind::MalformedLine, "unknown key " + key, line);
  }
  validate(base);
  return base;
}

inline nlohmann::json to_json(SimConfig c) {
  nlohmann::json j;
  detail::for_each_field(c, [&](const char* name, auto& field) {
    using T = std::decay_t<decltype(field)>;
    if constexpr (std::is_same_v<T, Offspring>)
      j[name] = field == Offspring::Geometric ? "geometric" : "powerlaw";
    else
      j[name] = field;
  });
  return j;
}

inline void write_config(std::ostream& os, SimConfig c) {
  auto j = to_json(c);
  detail::for_each_field(c, [&](const char* name, auto&) {
    const auto& v = j[name];
    os << name << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  });
}

// ----------------------------------------------------------------- presets

inline SimConfig with_agents(SimConfig c, std::size_t n_ai, std::size_t n_human) {
  c.n_ai = n_ai;
  c.n_human = n_human;
  return c;
}

// The negative control: no ambiguity, no drift, no branching, no net code
// growth. Agents still act, review and message at random.
inline SimConfig null_world(SimConfig c) {
  c.ambiguity = 0.0;
  c.drift = 0.0;
  c.branching_ratio = 0.0;
  c.loc_growth = 0.0;
  c.review_capacity = 2.0;
  return c;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"low-agent", "high-agent", "subcritical", "supercritical",
                                                 "null-world"};
  return names;
}

inline SimConfig preset(const std::string& name) {
  SimConfig c;
  if (name == "low-agent") return with_agents(c, 1, 11);
  if (name == "high-agent") return with_agents(c, 6, 6);
  if (name == "subcritical") return with_agents(c, 2, 4);
  if (name == "supercritical") return with_agents(c, 8, 2);
  if (name == "null-world") return with_agents(null_world(c), 4, 4);
  throw Error(ErrorKind::InvalidArgument, "unknown preset " + name);
}

// ---------------------------------------------------------------- the model

struct Prediction {
  std::string agent;
  double predicted = 0.0;  // internal-model probability of passing CI
  bool passed = false;
};

// Ground truth for one step. Measurement code never reads this.
struct StepTruth {
  std::size_t step = 0;
  double r = 0.0;
  std::size_t epoch = 0;  // number of governance gates in force after the step
  std::vector<std::string> gates;
  std::vector<std::pair<std::string, std::string>> true_cascade_edges;
  std::vector<Prediction> predictions;
  double capability = 0.0;
  double cumulative_drift = 0.0;
  double review_depth = 0.0;
  std::size_t violations = 0;
  std::vector<std::size_t> module_choices;  // one per agent, index into the initial modules
};

inline nlohmann::json to_json(const StepTruth& s) {
  nlohmann::json edges = nlohmann::json::array(), preds = nlohmann::json::array();
  for (const auto& [p, c] : s.true_cascade_edges) edges.push_back({p, c});
  for (const auto& p : s.predictions) preds.push_back({{"agent", p.agent}, {"predicted", p.predicted}, {"passed", p.passed}});
  return {{"step", s.step},
          {"r", s.r},
          {"epoch", s.epoch},
          {"gates", s.gates},
          {"true_cascade_edges", edges},
          {"predictions", preds},
          {"capability", s.capability},
          {"cumulative_drift", s.cumulative_drift},
          {"review_depth", s.review_depth},
          {"violations", s.violations},
          {"module_choices", s.module_choices}};
}

struct SimResult {
  SimConfig config;
  std::vector<CommitEvent> events;  // validated
  std::vector<StepTruth> truth;
  std::vector<std::string> initial_modules;
};

inline void write_truth_jsonl(std::ostream& os, std::span<const StepTruth> truth) {
  for (const auto& s : truth) os << to_json(s).dump() << '\n';
}

namespace detail {

inline std::string commit_name(std::size_t seq) {
  std::string digits = std::to_string(seq);
  return "c" + std::string(digits.size() < 8 ? 8 - digits.size() : 0, '0') + digits;
}

class World {
 public:
  explicit World(const SimConfig& c) : c_(c) {
    validate(c_);
    const std::size_t n = c_.n_ai + c_.n_human;
    for (std::size_t i = 0; i < n; ++i) {
      bool ai = i < c_.n_ai;
      auto idx = ai ? i : i - c_.n_ai;
      agents_.push_back({(ai ? "ai-" : "human-") + std::to_string(idx), ai ? AgentKind::AI : AgentKind::Human});
      agent_rng_.push_back(substream(c_.seed, "agent", i));
    }
    review_rng_ = substream(c_.seed, "review");
    cascade_rng_ = substream(c_.seed, "cascade");
    build_initial_graph();
    std::normal_distribution<double> aff(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& rng = agent_rng_[i];
      std::vector<double> a(n_initial_);
      for (auto& v : a) v = c_.affinity_sd * aff(rng);
      affinity_.push_back(std::move(a));
    }
  }

  SimResult run() {
    SimResult res;
    res.config = c_;
    for (std::size_t j = 0; j < n_initial_; ++j) res.initial_modules.push_back(graph_.name(j));
    if (c_.steps == 0) return res;
    emit_seed_commit();
    for (std::size_t t = 0; t < c_.steps; ++t) truth_.push_back(step(t));
    res.events = validate_event_log(std::move(events_));
    res.truth = std::move(truth_);
    return res;
  }

 private:
  struct Topology {
    double density = 0.0;
    double clustering = 0.0;
  };

  struct Novel {
    std::size_t author = 0;
    std::size_t module = 0;
  };

  // Smallest k with P(Binomial(n, p) <= k) > u, so one uniform fixes the draw.
  static std::size_t binomial_quantile(std::size_t n, double p, double u) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    double pmf = std::pow(1.0 - p, static_cast<double>(n)), cdf = pmf;
    std::size_t k = 0;
    while (cdf <= u && k < n) {
      pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * p / (1.0 - p);
      ++k;
      cdf += pmf;
    }
    return k;
  }

  struct Root {
    std::size_t event = 0;
    std::size_t module = 0;
    bool failed = false;
    bool escaped = false;
  };

  void build_initial_graph() {
    Rng rng = substream(c_.seed, "init");
    const std::size_t m = c_.modules_init;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t a = j % c_.areas;
      add_module("a" + std::to_string(a) + "/m" + std::to_string(j / c_.areas), a);
    }
    n_initial_ = m;
    // Triangles raise clustering; the remaining edges only join modules of
    // opposite index parity, which closes no triangle among themselves.
    auto target = static_cast<std::size_t>(std::llround(c_.init_density * static_cast<double>(m * (m - 1))));
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (std::size_t attempt = 0; graph_.edge_count() < target && attempt < 100 * m * m; ++attempt) {
      if (uniform01(rng) < c_.init_triangle_share) {
        std::size_t u = pick(rng), v = pick(rng), w = pick(rng);
        if (u == v || v == w || u == w) continue;
        for (auto [f, t] : {std::pair{u, v}, {v, w}, {u, w}})
          if (graph_.edge_count() < target && !graph_.has_edge(t, f)) graph_.add_edge(f, t);
      } else {
        std::size_t u = pick(rng), v = pick(rng);
        if ((u % 2) == (v % 2) || graph_.has_edge(v, u)) continue;
        graph_.add_edge(u, v);
      }
    }
  }

  std::size_t add_module(const std::string& name, std::size_t area) {
    auto i = graph_.add_node(name);
    area_.push_back(area);
    friction_.push_back(0.0);
    violations_.push_back(0);
    gated_.push_back(false);
    return i;
  }

  CommitEvent& new_event(std::int64_t ts, std::size_t author) {
    CommitEvent e;
    e.commit_id = commit_name(seq_++);
    e.timestamp = ts;
    e.author = agents_[author];
    events_.push_back(std::move(e));
    return events_.back();
  }

  void emit_seed_commit() {
    auto& e = new_event(0, c_.n_ai);
    for (std::size_t j = 0; j < n_initial_; ++j) e.modules_touched.push_back(graph_.name(j));
    e.loc_delta = std::llround(c_.initial_loc * static_cast<double>(n_initial_));
    for (auto [f, t] : graph_.edges()) e.deps_added.emplace_back(graph_.name(f), graph_.name(t));
    e.ci_passed = true;
    e.quality_score = c_.quality_base;
  }

  std::size_t categorical(const std::vector<double>& w, double u) const {
    double total = 0.0;
    for (double v : w) total += v;
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      acc += w[k] / total;
      if (u < acc) return k;
    }
    return w.size() - 1;
  }

  // Offspring mean of a failure: b at the reference topology, scaled
  // log-linearly by how much more (or less) coupled the graph is this step.
  double offspring_mean(const Topology& topo) const {
    return c_.branching_ratio * std::exp(c_.cascade_density_weight * (topo.density - c_.cascade_density_ref) +
                                         c_.cascade_clustering_weight * (topo.clustering - c_.cascade_clustering_ref));
  }

  std::size_t draw_offspring(double mu) {
    double u = uniform01(cascade_rng_);
    if (mu <= 0.0) return 0;
    if (c_.offspring == Offspring::PowerLaw) {
      std::int64_t x = stats::sample_discrete_powerlaw(cascade_rng_, 1, c_.offspring_alpha);
      return static_cast<std::size_t>(std::min<std::int64_t>(x - 1, 1000000));
    }
    // Geometric on {0, 1, ...} with mean mu.
    double p = 1.0 / (1.0 + mu);
    return static_cast<std::size_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

  double quality(bool semantic, bool violation) const {
    double q = c_.quality_base - (semantic ? 0.0 : c_.quality_penalty) - (violation ? c_.quality_penalty : 0.0);
    return std::clamp(q, 0.0, 1.0);
  }

  // A failing commit created by the branching process or by an escaped
  // defect surfacing downstream.
  std::pair<std::size_t, std::size_t> spawn_failure(std::size_t parent_event, std::size_t parent_module, std::int64_t window_end,
                            StepTruth& truth) {
    const auto& preds = graph_.predecessors(parent_module);
    std::size_t module = parent_module;
    double u_mod = uniform01(cascade_rng_);
    if (!preds.empty()) {
      auto k = std::min(preds.size() - 1, static_cast<std::size_t>(u_mod * static_cast<double>(preds.size())));
      module = *std::next(preds.begin(), static_cast<std::ptrdiff_t>(k));
    }
    auto author = std::uniform_int_distribution<std::size_t>(0, agents_.size() - 1)(cascade_rng_);
    double loc = std::exponential_distribution<double>(1.0)(cascade_rng_);
    double cd = std::normal_distribution<double>(0.0, 1.0)(cascade_rng_);
    auto ts = std::min(events_[parent_event].timestamp + 1, window_end - 1);
    std::string parent_id = events_[parent_event].commit_id;
    auto& e = new_event(ts, author);
    e.modules_touched = {graph_.name(module)};
    e.parent_triggers = {parent_id};
    e.ci_passed = false;
    e.loc_delta = std::llround(0.5 * c_.loc_growth * loc);
    e.quality_score = quality(false, false);
    e.complexity_delta = c_.complexity_sd * cd;
    truth.true_cascade_edges.emplace_back(parent_id, e.commit_id);
    return {events_.size() - 1, module};
  }

  void cascade(std::size_t root_event, std::size_t root_module, bool root_is_failure, std::int64_t window_end,
               const Topology& topo, StepTruth& truth) {
    struct Node {
      std::size_t event, module, depth;
    };
    std::deque<Node> queue;
    std::size_t size = 1;
    if (root_is_failure) {
      queue.push_back({root_event, root_module, 0});
    } else {
      // Escaped defect: it surfaces as one failing commit downstream.
      auto [ev, module] = spawn_failure(root_event, root_module, window_end, truth);
      queue.push_back({ev, module, 1});
      ++size;
    }
    while (!queue.empty()) {
      auto node = queue.front();
      queue.pop_front();
      auto k = draw_offspring(offspring_mean(topo));
      if (node.depth >= c_.max_cascade_depth) continue;
      for (std::size_t j = 0; j < k && size < c_.max_cascade_size; ++j) {
        auto [ev, module] = spawn_failure(node.event, node.module, window_end, truth);
        queue.push_back({ev, module, node.depth + 1});
        ++size;
      }
    }
  }

  StepTruth step(std::size_t t) {
    const std::size_t n = agents_.size();
    const double eps = c_.ambiguity;
    StepTruth truth;
    truth.step = t;
    truth.r = c_.ratio();
    truth.capability = std::min(1.0, c_.base_capability + c_.capability_growth * static_cast<double>(t));
    truth.cumulative_drift = c_.drift * static_cast<double>(t);
    const double success = std::clamp(truth.capability - truth.cumulative_drift, 0.0, 1.0);
    const double depth = std::min(1.0, c_.review_capacity * static_cast<double>(c_.n_human) / static_cast<double>(n));
    const bool semantic = depth >= c_.review_floor;
    truth.review_depth = depth;

    const std::int64_t window_start = static_cast<std::int64_t>(t) * kStepSeconds;
    const std::int64_t window_end = window_start + kStepSeconds;
    const std::int64_t spacing = kStepSeconds / static_cast<std::int64_t>(n + 1);

    std::vector<std::size_t> same_module(n_initial_, 0);
    std::vector<Root> roots;
    std::vector<Novel> novel_now;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);

    for (std::size_t i = 0; i < n; ++i) {
      auto& rng = agent_rng_[i];
      // Every variate is drawn whether or not it is used, so an agent's
      // stream does not depend on its kind or on the world parameters.
      double u_mod = uniform01(rng), u_defect = uniform01(rng), u_detect = uniform01(rng),
             u_catch = uniform01(rng), u_gate = uniform01(rng), u_viol = uniform01(rng),
             u_target = uniform01(rng), u_novel = uniform01(rng), u_conflict = uniform01(rng),
             u_msg = uniform01(rng), u_msg_target = uniform01(rng), u_integrate = uniform01(rng),
             u_integrate_at = uniform01(rng);
      double loc = expo(rng), cd = normal(rng);
      const bool ai = agents_[i].kind == AgentKind::AI;
      const auto root_ts = window_start + static_cast<std::int64_t>(i + 1) * spacing;

      // Integration work: an AI agent picks up some of the modules other
      // agents introduced in the previous step, one commit each, just before
      // its own root commit.
      if (ai) {
        std::vector<std::size_t> others;
        for (const auto& nv : novel_last_)
          if (nv.author != i) others.push_back(nv.module);
        auto count = binomial_quantile(others.size(), eps * c_.integration_rate, u_integrate);
        auto offset = std::min(others.size(), static_cast<std::size_t>(u_integrate_at * static_cast<double>(others.size())));
        for (std::size_t k = 0; k < count; ++k) {
          auto& ie = new_event(root_ts - static_cast<std::int64_t>(count - k), i);
          ie.modules_touched = {graph_.name(others[(offset + k) % others.size()])};
          ie.ci_passed = true;
          ie.loc_delta = std::llround(0.5 * c_.loc_growth * loc);
          ie.quality_score = quality(semantic, false);
        }
      }

      std::vector<double> w(n_initial_);
      for (std::size_t j = 0; j < n_initial_; ++j) w[j] = std::exp(affinity_[i][j] - c_.adaptivity * friction_[j]);
      const std::size_t module = categorical(w, u_mod);
      truth.module_choices.push_back(module);

      const double p_defect = ai ? eps * (1.0 - success) : eps * c_.human_defect;
      const bool defect = u_defect < p_defect;
      const bool detected = defect && u_detect < c_.ci_detect;
      const double p_conflict = 1.0 - std::pow(1.0 - eps * c_.conflict_rate, static_cast<double>(same_module[module]));
      ++same_module[module];
      const bool failed = detected || u_conflict < p_conflict;
      const bool caught = defect && !failed && semantic && u_catch < c_.semantic_catch;
      const bool escaped = defect && !failed && !caught;
      const bool gate_rework = gated_[module] && u_gate < c_.gate_rework;

      auto& e = new_event(root_ts, i);
      e.modules_touched = {graph_.name(module)};
      e.ci_passed = !failed;
      e.required_rework = caught || gate_rework;
      e.loc_delta = std::llround(c_.loc_growth * loc);
      e.complexity_delta = c_.complexity_sd * cd + (ai ? eps * c_.ai_complexity_shift : 0.0);

      if (ai) {
        double predicted = 1.0 - eps * (1.0 - truth.capability) * c_.ci_detect;
        truth.predictions.push_back({agents_[i].id, predicted, !failed});
      }

      bool violation = false;
      if (ai) {
        double shortfall = c_.review_floor > 0.0 ? std::max(0.0, c_.review_floor - depth) / c_.review_floor : 0.0;
        if (u_viol < eps * std::min(1.0, c_.violation_base + c_.violation_gain * shortfall)) {
          std::vector<double> attach(graph_.node_count(), 0.0);
          for (std::size_t j = 0; j < graph_.node_count(); ++j)
            if (area_[j] != area_[module] && !graph_.has_edge(module, j) && !graph_.has_edge(j, module))
              attach[j] = std::pow(static_cast<double>(graph_.predecessors(j).size()) + 1.0, c_.pref_attach);
          if (std::any_of(attach.begin(), attach.end(), [](double v) { return v > 0.0; })) {
            auto target = categorical(attach, u_target);
            graph_.add_edge(module, target);
            e.deps_added.emplace_back(graph_.name(module), graph_.name(target));
            ++violations_[module];
            ++truth.violations;
            violation = true;
          }
        }
        if (u_novel < eps * c_.novelty_rate) {
          std::string name = "a" + std::to_string(area_[module]) + "/x" + std::to_string(novel_++);
          auto fresh = add_module(name, area_[module]);
          novel_now.push_back({i, fresh});
          graph_.add_edge(fresh, module);
          e.modules_touched.push_back(name);
          e.deps_added.emplace_back(name, graph_.name(module));
        }
      }
      e.quality_score = quality(semantic, violation);

      if (u_msg < c_.message_rate && n > 1) {
        auto k = std::min(n - 2, static_cast<std::size_t>(u_msg_target * static_cast<double>(n - 1)));
        e.messages_to = {agents_[k >= i ? k + 1 : k].id};
      }
      roots.push_back({events_.size() - 1, module, failed, escaped});
    }

    // Reviews: a random other human per root commit, at the load-determined depth.
    for (const auto& root : roots) {
      auto& e = events_[root.event];
      std::vector<std::size_t> candidates;
      for (std::size_t h = c_.n_ai; h < n; ++h)
        if (agents_[h].id != e.author.id) candidates.push_back(h);
      auto u = uniform01(review_rng_);
      if (candidates.empty()) continue;
      auto k = std::min(candidates.size() - 1, static_cast<std::size_t>(u * static_cast<double>(candidates.size())));
      e.review = Review{agents_[candidates[k]], depth};
    }

    Topology topo{link_density(graph_), clustering_coefficient(graph_)};
    for (const auto& root : roots)
      if (root.failed || root.escaped) cascade(root.event, root.module, root.failed, window_end, topo, truth);

    if ((t + 1) % c_.governance_period == 0) {
      std::optional<std::size_t> best;
      for (std::size_t j = 0; j < graph_.node_count(); ++j)
        if (!gated_[j] && violations_[j] > 0 && (!best || violations_[j] > violations_[*best])) best = j;
      if (best) {
        gated_[*best] = true;
        friction_[*best] += c_.gate_friction;
        gate_names_.push_back(graph_.name(*best));
      }
    }
    novel_last_ = std::move(novel_now);
    truth.epoch = gate_names_.size();
    truth.gates = gate_names_;
    return truth;
  }

  SimConfig c_;
  std::vector<AgentId> agents_;
  std::vector<Rng> agent_rng_;
  Rng review_rng_;
  Rng cascade_rng_;
  DependencyGraph graph_;
  std::size_t n_initial_ = 0;
  std::vector<std::size_t> area_;
  std::vector<double> friction_;
  std::vector<std::size_t> violations_;
  std::vector<bool> gated_;
  std::vector<std::string> gate_names_;
  std::vector<std::vector<double>> affinity_;
  std::vector<CommitEvent> events_;
  std::vector<StepTruth> truth_;
  std::size_t seq_ = 0;
  std::size_t novel_ = 0;
  std::vector<Novel> novel_last_;
};

}  // namespace detail

inline SimResult run(const SimConfig& config) { return detail::World(config).run(); }

// Share of commits authored by AI agents.
inline double ai_commit_share(std::span<const CommitEvent> events) {
  if (events.empty()) return 0.0;
  std::size_t ai = 0;
  for (const auto& e : events) ai += e.author.kind == AgentKind::AI;
  return static_cast<double>(ai) / static_cast<double>(events.size());
}

}  // namespace emergelab::sim
