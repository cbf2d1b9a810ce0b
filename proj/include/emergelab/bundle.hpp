#pragma once

// A simulation bundle: the inputs of every proposition test, generated from
// one world configuration, and the battery that runs over it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emergelab/coarse_grain.hpp"
#include "emergelab/detail/csv.hpp"
#include "emergelab/ecosystem_sim.hpp"
#include "emergelab/graph_metrics.hpp"
#include "emergelab/ingest.hpp"
#include "emergelab/propositions.hpp"

namespace emergelab {

struct BundleOptions {
  std::uint64_t seed = 1;
  std::size_t p1_runs = 10;  // per group
  std::size_t p1_steps = 60;
  std::size_t p2_humans = 6;
  std::size_t p2_max_ai = 36;
  std::size_t p2_steps = 120;
  std::size_t main_steps = 240;
  std::size_t periods = 12;
  std::vector<double> p4_scales = {0.5, 1, 2, 4, 8};
  std::size_t p4_replicates = 3;
  std::size_t p4_steps = 60;
  // P7 needs topology to vary across windows more than it does within one
  // run, so it uses many short runs on larger, randomly drawn initial graphs.
  std::size_t p7_runs = 300;
  std::size_t p7_steps = 10;
  std::size_t p7_modules = 24;
  double p7_min_density = 0.02;
  double p7_max_density = 0.22;
};

struct Bundle {
  std::string world;
  sim::SimConfig config;  // world parameters; agent counts of the main run
  std::vector<std::vector<double>> p1_high, p1_low;
  std::vector<double> p2_r, p2_reliability;
  std::vector<CommitEvent> events;  // main run, read by P3 and P6
  std::vector<props::RateObservation> p4_rates;
  std::vector<std::int64_t> p4_cascade_sizes;
  std::vector<double> p5_intervention, p5_rules, p5_capability;
  std::vector<double> p7_occurrence, p7_clustering, p7_density;
};

namespace detail {

inline std::vector<double> entropy_series(const sim::SimResult& run) {
  SeriesOptions so;
  so.start = 0;
  so.window_count = run.config.steps;
  auto s = build_series(run.events, {}, so);
  std::vector<double> e;
  for (const auto& w : s.windows) e.push_back(w.macro.entropy);
  return e;
}

inline double failure_share(std::span<const CommitEvent> events) {
  if (events.empty()) return 0.0;
  double failed = 0.0;
  for (const auto& e : events) failed += e.ci_passed && !*e.ci_passed;
  return failed / static_cast<double>(events.size());
}

// Per step: whether a CI failure rooted in it propagated (a failing-root
// cascade of size >= 2), and the clustering and density of the dependency
// graph at its end.
inline void window_topology(const sim::SimResult& run, std::vector<double>& occurrence,
                            std::vector<double>& clustering, std::vector<double>& density) {
  const auto steps = run.config.steps;
  std::vector<double> occ(steps, 0.0);
  for (const auto& c : extract_cascades(run.events))
    if (c.root_failed && c.size >= 2) occ[std::min<std::size_t>(steps - 1, static_cast<std::size_t>(c.start_ts / sim::kStepSeconds))] = 1.0;
  GraphReplay replay;
  std::size_t next = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto end = static_cast<std::int64_t>(t + 1) * sim::kStepSeconds;
    while (next < run.events.size() && run.events[next].timestamp < end) replay.apply(run.events[next++]);
    occurrence.push_back(occ[t]);
    clustering.push_back(clustering_coefficient(replay.graph()));
    density.push_back(link_density(replay.graph()));
  }
}

}  // namespace detail

// Paired seeds: replicate k of every arm uses the same run seed, so arms that
// differ only in agent kinds draw identical variates.
inline Bundle make_bundle(const std::string& world, const BundleOptions& opt = {}) {
  Bundle b;
  b.world = world;
  b.config = sim::preset(world);
  b.config.seed = opt.seed;
  const auto base = b.config;
  auto run_seed = [&](std::string_view arm, std::size_t k) { return substream_seed(opt.seed, arm, k); };

  for (std::size_t k = 0; k < opt.p1_runs; ++k) {
    auto hi = sim::with_agents(base, 6, 6), lo = sim::with_agents(base, 1, 11);
    hi.steps = lo.steps = opt.p1_steps;
    hi.seed = lo.seed = run_seed("p1", k);
    b.p1_high.push_back(detail::entropy_series(sim::run(hi)));
    b.p1_low.push_back(detail::entropy_series(sim::run(lo)));
  }

  for (std::size_t a = 1; a <= opt.p2_max_ai; ++a) {
    auto c = sim::with_agents(base, a, opt.p2_humans);
    c.steps = opt.p2_steps;
    c.seed = run_seed("p2", a);
    auto r = sim::run(c);
    b.p2_r.push_back(c.ratio());
    b.p2_reliability.push_back(1.0 - detail::failure_share(r.events));
  }

  {
    auto c = base;
    c.steps = opt.main_steps;
    c.seed = run_seed("main", 0);
    auto r = sim::run(c);
    const std::size_t per = std::max<std::size_t>(1, opt.main_steps / opt.periods);
    for (std::size_t p = 0; p < opt.periods; ++p) {
      const auto lo = static_cast<std::int64_t>(p * per) * sim::kStepSeconds;
      const auto hi = static_cast<std::int64_t>((p + 1) * per) * sim::kStepSeconds;
      double n = 0, hit = 0;
      for (const auto& e : r.events)
        if (e.timestamp >= lo && e.timestamp < hi) {
          n += 1;
          hit += (e.ci_passed && !*e.ci_passed) || e.required_rework;
        }
      const auto& last = r.truth[std::min(r.truth.size() - 1, (p + 1) * per - 1)];
      b.p5_intervention.push_back(n > 0 ? hit / n : 0.0);
      b.p5_rules.push_back(static_cast<double>(last.epoch));
      b.p5_capability.push_back(last.capability);
    }
    b.events = std::move(r.events);
  }

  for (double scale : opt.p4_scales) {
    auto n_ai = static_cast<std::size_t>(std::llround(scale * static_cast<double>(base.n_ai)));
    auto n_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(scale * static_cast<double>(base.n_human))));
    for (std::size_t k = 0; k < opt.p4_replicates; ++k) {
      auto c = sim::with_agents(base, n_ai, n_h);
      c.steps = opt.p4_steps;
      c.seed = run_seed("p4", k);
      auto r = sim::run(c);
      b.p4_rates.push_back({static_cast<double>(n_ai + n_h),
                            static_cast<double>(r.events.size()) / static_cast<double>(c.steps)});
      for (const auto& cas : extract_cascades(r.events))
        if (cas.root_failed) b.p4_cascade_sizes.push_back(static_cast<std::int64_t>(cas.size));
    }
  }

  Rng topo = substream(opt.seed, "p7-graphs");
  for (std::size_t k = 0; k < opt.p7_runs; ++k) {
    auto c = base;
    c.steps = opt.p7_steps;
    c.seed = run_seed("p7", k);
    c.modules_init = opt.p7_modules;
    c.init_density = opt.p7_min_density + (opt.p7_max_density - opt.p7_min_density) * uniform01(topo);
    c.init_triangle_share = uniform01(topo);
    detail::window_topology(sim::run(c), b.p7_occurrence, b.p7_clustering, b.p7_density);
  }
  return b;
}

// ------------------------------------------------------------ persistence

inline void write_bundle(const Bundle& b, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open("p1_entropy.csv");
    csv::write_row(os, {"group", "series", "t", "E"});
    for (const auto* g : {&b.p1_high, &b.p1_low})
      for (std::size_t s = 0; s < g->size(); ++s)
        for (std::size_t t = 0; t < (*g)[s].size(); ++t)
          csv::write_row(os, {g == &b.p1_high ? "high" : "low", std::to_string(s), std::to_string(t),
                              format_double((*g)[s][t])});
  }
  {
    auto os = open("p2_reliability.csv");
    csv::write_row(os, {"r", "reliability"});
    for (std::size_t i = 0; i < b.p2_r.size(); ++i)
      csv::write_row(os, {format_double(b.p2_r[i]), format_double(b.p2_reliability[i])});
  }
  {
    auto os = open("events.jsonl");
    ingest::emit_jsonl(os, b.events);
  }
  {
    auto os = open("p4_rates.csv");
    csv::write_row(os, {"n", "rate"});
    for (const auto& o : b.p4_rates) csv::write_row(os, {format_double(o.n), format_double(o.rate)});
  }
  {
    auto os = open("p4_cascades.csv");
    csv::write_row(os, {"size"});
    for (auto s : b.p4_cascade_sizes) csv::write_row(os, {std::to_string(s)});
  }
  {
    auto os = open("p5_feedback.csv");
    csv::write_row(os, {"period", "intervention", "rules", "capability"});
    for (std::size_t i = 0; i < b.p5_intervention.size(); ++i)
      csv::write_row(os, {std::to_string(i), format_double(b.p5_intervention[i]), format_double(b.p5_rules[i]),
                          format_double(b.p5_capability[i])});
  }
  {
    auto os = open("p7_windows.csv");
    csv::write_row(os, {"occurrence", "clustering", "density"});
    for (std::size_t i = 0; i < b.p7_occurrence.size(); ++i)
      csv::write_row(os, {format_double(b.p7_occurrence[i]), format_double(b.p7_clustering[i]),
                          format_double(b.p7_density[i])});
  }
  auto os = open("manifest.json");
  os << nlohmann::json{{"world", b.world},
                       {"config", sim::to_json(b.config)},
                       {"dt", sim::kStepSeconds},
                       {"files",
                        {"p1_entropy.csv", "p2_reliability.csv", "events.jsonl", "p4_rates.csv", "p4_cascades.csv",
                         "p5_feedback.csv", "p7_windows.csv"}}}
            .dump(2)
     << '\n';
}

namespace detail {

inline csv::Table read_table(const std::filesystem::path& p, std::initializer_list<const char*> required) {
  std::ifstream is(p);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + p.string());
  auto t = csv::read(is);
  for (const char* c : required)
    if (t.column(c) < 0) throw Error(ErrorKind::MissingRequiredField, p.filename().string() + ": column " + c);
  return t;
}

inline std::vector<double> numeric_column(const csv::Table& t, const char* name) {
  std::vector<double> out;
  auto c = t.column(name);
  std::int64_t line = 1;
  for (const auto& row : t.rows) out.push_back(csv::parse_double(row[static_cast<std::size_t>(c)], ++line));
  return out;
}

}  // namespace detail

// Reads whichever bundle files exist; absent ones leave their fields empty.
inline Bundle read_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "not a bundle directory: " + dir.string());
  Bundle b;
  if (fs::exists(dir / "manifest.json")) {
    std::ifstream is(dir / "manifest.json");
    auto m = nlohmann::json::parse(is, nullptr, false);
    if (m.is_object() && m.contains("world")) b.world = m["world"].get<std::string>();
  }
  if (fs::exists(dir / "p1_entropy.csv")) {
    auto t = detail::read_table(dir / "p1_entropy.csv", {"group", "series", "t", "E"});
    auto series = detail::numeric_column(t, "series");
    auto values = detail::numeric_column(t, "E");
    auto g = static_cast<std::size_t>(t.column("group"));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      auto& group = t.rows[i][g] == "high" ? b.p1_high : b.p1_low;
      auto s = static_cast<std::size_t>(series[i]);
      if (group.size() <= s) group.resize(s + 1);
      group[s].push_back(values[i]);
    }
  }
  if (fs::exists(dir / "p2_reliability.csv")) {
    auto t = detail::read_table(dir / "p2_reliability.csv", {"r", "reliability"});
    b.p2_r = detail::numeric_column(t, "r");
    b.p2_reliability = detail::numeric_column(t, "reliability");
  }
  if (fs::exists(dir / "events.jsonl")) {
    std::ifstream is(dir / "events.jsonl");
    b.events = validate_event_log(ingest::parse_jsonl(is));
  }
  if (fs::exists(dir / "p4_rates.csv")) {
    auto t = detail::read_table(dir / "p4_rates.csv", {"n", "rate"});
    auto n = detail::numeric_column(t, "n"), r = detail::numeric_column(t, "rate");
    for (std::size_t i = 0; i < n.size(); ++i) b.p4_rates.push_back({n[i], r[i]});
  }
  if (fs::exists(dir / "p4_cascades.csv")) {
    auto t = detail::read_table(dir / "p4_cascades.csv", {"size"});
    for (double s : detail::numeric_column(t, "size")) b.p4_cascade_sizes.push_back(static_cast<std::int64_t>(s));
  }
  if (fs::exists(dir / "p5_feedback.csv")) {
    auto t = detail::read_table(dir / "p5_feedback.csv", {"intervention", "rules", "capability"});
    b.p5_intervention = detail::numeric_column(t, "intervention");
    b.p5_rules = detail::numeric_column(t, "rules");
    b.p5_capability = detail::numeric_column(t, "capability");
  }
  if (fs::exists(dir / "p7_windows.csv")) {
    auto t = detail::read_table(dir / "p7_windows.csv", {"occurrence", "clustering", "density"});
    b.p7_occurrence = detail::numeric_column(t, "occurrence");
    b.p7_clustering = detail::numeric_column(t, "clustering");
    b.p7_density = detail::numeric_column(t, "density");
  }
  return b;
}

// ---------------------------------------------------------------- battery

struct BatteryOptions {
  props::HarnessOptions harness;
  std::set<std::string> propositions = {"P1", "P2", "P3", "P4", "P5", "P6", "P7"};
  props::P3Options p3;
  props::P6Options p6;
  std::size_t p1_permutations = 10000;
  std::size_t p2_shuffles = 5000;
  std::size_t p4_bootstrap = 2000;
  std::size_t p7_bootstrap = 1000;
  std::int64_t dt = sim::kStepSeconds;
};

// Runs the selected propositions over a bundle. A proposition whose data show
// no variation at all gets INCONCLUSIVE; every other input error propagates.
inline std::vector<props::PropositionVerdict> run_battery(const Bundle& b, const BatteryOptions& opt = {}) {
  std::vector<props::PropositionVerdict> out;
  auto guarded = [&](const std::string& id, auto&& f) {
    if (!opt.propositions.count(id)) return;
    try {
      out.push_back(f());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoVariation) throw;
      props::PropositionVerdict v;
      v.id = id;
      v.verdict = props::Verdict::Inconclusive;
      v.warnings.push_back(e.what());
      v.config = props::detail::base_config(opt.harness, id);
      out.push_back(std::move(v));
    }
  };
  const auto& h = opt.harness;
  guarded("P1", [&] { return props::p1_entropy_slopes(b.p1_high, b.p1_low, h, opt.p1_permutations); });
  guarded("P2", [&] { return props::p2_changepoint(b.p2_r, b.p2_reliability, h, opt.p2_shuffles); });
  guarded("P3", [&] {
    SeriesOptions so;
    so.dt = opt.dt;
    so.start = 0;
    if (!b.events.empty())
      so.window_count = static_cast<std::size_t>(b.events.back().timestamp / opt.dt + 1);
    return props::p3_emergence(b.events, so, opt.p3, h);
  });
  guarded("P4", [&] { return props::p4_powerlaw(b.p4_rates, b.p4_cascade_sizes, h, opt.p4_bootstrap); });
  guarded("P5", [&] { return props::p5_feedback(b.p5_intervention, b.p5_rules, b.p5_capability, h); });
  guarded("P6", [&] {
    auto p6 = opt.p6;
    p6.dt = opt.dt;
    return props::p6_comprehension(b.events, p6, h);
  });
  guarded("P7", [&] { return props::p7_cascade_topology(b.p7_occurrence, b.p7_clustering, b.p7_density, h, opt.p7_bootstrap); });
  for (auto& v : out) v.config["world"] = b.world;
  return out;
}

}  // namespace emergelab
