// emergelab command-line front end.
//
// Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
// 4 conflicting evidence.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "emergelab/bundle.hpp"
#include "emergelab/coarse_grain.hpp"
#include "emergelab/ecosystem_sim.hpp"
#include "emergelab/effective_information.hpp"
#include "emergelab/graph_metrics.hpp"
#include "emergelab/ingest.hpp"
#include "emergelab/propositions.hpp"
#include "emergelab/svg.hpp"

namespace fs = std::filesystem;
using namespace emergelab;

namespace {

constexpr int kUsage = 2, kIo = 3, kConflict = 4;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Io: return kIo;
    case ErrorKind::ConflictingEvidence: return kConflict;
    default: return kUsage;
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path);
  return os;
}

void finish(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<CommitEvent> read_events(const std::string& path) {
  auto is = open_in(path);
  return validate_event_log(ingest::parse_jsonl(is));
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config, preset, out, truth;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
  if (a.config.empty() && a.preset.empty()) {
    std::cerr << "simulate: give --config or --preset\n";
    return kUsage;
  }
  sim::SimConfig c = a.preset.empty() ? sim::SimConfig{} : sim::preset(a.preset);
  if (!a.config.empty()) {
    auto is = open_in(a.config);
    c = sim::parse_config(is, c);
  }
  if (a.seed) c.seed = *a.seed;
  auto r = sim::run(c);
  auto os = open_out(a.out);
  ingest::emit_jsonl(os, r.events);
  finish(os, a.out);
  if (!a.truth.empty()) {
    auto ts = open_out(a.truth);
    sim::write_truth_jsonl(ts, r.truth);
    finish(ts, a.truth);
  }
  std::cout << "events " << r.events.size() << "\nsteps " << c.steps << "\nai_share " << sim::ai_commit_share(r.events)
            << "\n";
  return 0;
}

// ------------------------------------------------------------------ ingest

struct IngestArgs {
  std::string log, ci, reviews, deps, ai_authors, out;
  std::size_t module_depth = 1;
};

int cmd_ingest(const IngestArgs& a, bool git) {
  std::vector<CommitEvent> events;
  {
    auto is = open_in(a.log);
    if (git) {
      ingest::GitLogOptions opt;
      opt.ai_author_patterns = split_list(a.ai_authors);
      opt.module_depth = a.module_depth;
      events = ingest::parse_git_log(is, opt);
    } else {
      events = ingest::parse_jsonl(is);
    }
  }
  std::vector<ingest::CiRecord> ci;
  std::vector<ingest::ReviewRecord> reviews;
  std::vector<DependencySnapshot> deps;
  if (!a.ci.empty()) {
    auto is = open_in(a.ci);
    ci = ingest::parse_ci_jsonl(is);
  }
  if (!a.reviews.empty()) {
    auto is = open_in(a.reviews);
    reviews = ingest::parse_review_jsonl(is);
  }
  if (!a.deps.empty()) {
    auto is = open_in(a.deps);
    deps = ingest::parse_snapshots_jsonl(is);
  }
  auto merged = ingest::merge_evidence(std::move(events), std::move(ci), std::move(reviews), std::move(deps));
  auto os = open_out(a.out);
  ingest::emit_jsonl(os, merged.events);
  finish(os, a.out);

  auto s = ingest::summarize(merged.events);
  std::cout << "commits " << s.commits << "\nai_share " << s.ai_share << "\nfirst_ts " << s.first_ts << "\nlast_ts "
            << s.last_ts << "\nspan_days " << static_cast<double>(s.last_ts - s.first_ts) / 86400.0
            << "\nunmatched_ci " << merged.unmatched_ci.size() << "\nunmatched_reviews "
            << merged.unmatched_reviews.size() << "\nunattributed_dependency_changes "
            << merged.unattributed_dependency_changes << "\n";
  return 0;
}

// ----------------------------------------------------------------- measure

struct MeasureArgs {
  std::string events, deps, out_series, out_tensor, out_cascades;
  std::int64_t dt = 86400;
  bool heuristic = false;
  std::int64_t horizon = 86400;
};

int cmd_measure(const MeasureArgs& a) {
  auto events = read_events(a.events);
  std::vector<DependencySnapshot> deps;
  if (!a.deps.empty()) {
    auto is = open_in(a.deps);
    deps = ingest::parse_snapshots_jsonl(is);
  }
  SeriesOptions so;
  so.dt = a.dt;
  auto series = build_series(events, deps, so);
  {
    auto os = open_out(a.out_series);
    write_series_csv(os, series);
    finish(os, a.out_series);
  }
  if (!a.out_tensor.empty()) {
    auto os = open_out(a.out_tensor);
    write_tensor_csv(os, series);
    finish(os, a.out_tensor);
  }
  CascadeOptions co;
  co.heuristic_edges = a.heuristic;
  co.horizon = a.horizon;
  auto cascades = extract_cascades(events, co);
  if (!a.out_cascades.empty()) {
    auto os = open_out(a.out_cascades);
    write_cascades_csv(os, cascades);
    finish(os, a.out_cascades);
  }
  std::size_t largest = 0;
  for (const auto& c : cascades) largest = std::max(largest, c.size);
  std::cout << "windows " << series.windows.size() << "\nagents " << series.roster.size() << "\ncascades "
            << cascades.size() << "\nlargest_cascade " << largest << "\nfan_out " << fan_out_ratio(events, co) << "\n";
  return 0;
}

// ---------------------------------------------------------------------- ei

struct EiArgs {
  std::string series, out, variant = "canonical", intervention = "uniform";
  std::size_t bins = 2, budget = 16, bootstrap = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
};

int cmd_ei(const EiArgs& a) {
  if (a.bins < 2) throw Error(ErrorKind::InvalidArgument, "--bins must be at least 2");
  if (a.budget < 2) throw Error(ErrorKind::InvalidArgument, "--budget must be at least 2");
  auto is = open_in(a.series);
  auto table = read_series_csv(is);
  props::P3Options p3;
  p3.bins = a.bins;
  p3.budget = a.budget;
  p3.resamples = a.bootstrap;
  p3.variant = a.variant == "kl-uniform" ? ei::EiVariant::KlToUniform : ei::EiVariant::Canonical;
  p3.intervention = a.intervention == "empirical" ? ei::Intervention::Empirical : ei::Intervention::Uniform;
  props::HarnessOptions h;
  h.seed = a.seed;
  h.alpha = a.alpha;
  auto eo = props::emergence_options(p3, h);
  auto r = props::measure_emergence(table.macro, table.micro, p3, eo);
  auto j = ei::to_json(r, a.bins);
  j["budget"] = a.budget;
  j["seed"] = a.seed;
  j["windows"] = table.t.size();
  j["variant"] = a.variant;
  j["intervention"] = a.intervention;
  auto os = open_out(a.out);
  os << j.dump(2) << '\n';
  finish(os, a.out);
  std::cout << "ei_micro " << r.ei_micro << "\nei_macro " << r.ei_macro << "\nce " << r.ce << "\nclassification "
            << ei::to_string(r.classification) << "\n";
  return 0;
}

// ------------------------------------------------------------------ bundle

struct BundleArgs {
  std::string world = "supercritical", out;
  std::uint64_t seed = 1;
};

int cmd_bundle(const BundleArgs& a) {
  BundleOptions bo;
  bo.seed = a.seed;
  write_bundle(make_bundle(a.world, bo), a.out);
  std::cout << "bundle " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------- test-propositions

struct TestArgs {
  std::string bundle, world, events, propositions, report, plots;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  bool bonferroni = false;
  std::optional<double> theta;
  double rho = 0.5;
  std::int64_t dt = sim::kStepSeconds;
};

const props::PropositionVerdict* find(const std::vector<props::PropositionVerdict>& vs, const std::string& id) {
  for (const auto& v : vs)
    if (v.id == id) return &v;
  return nullptr;
}

double stat(const std::map<std::string, double>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? std::nan("") : it->second;
}

void write_plots(const Bundle& b, const std::vector<props::PropositionVerdict>& vs, const fs::path& dir) {
  fs::create_directories(dir);
  if (find(vs, "P1")) {
    svg::Chart c{"Structural entropy by agent intensity", "step", "E (bits)"};
    for (const auto* g : {&b.p1_high, &b.p1_low})
      for (const auto& s : *g) {
        svg::Series line;
        for (std::size_t t = 0; t < s.size(); ++t) line.x.push_back(static_cast<double>(t)), line.y.push_back(s[t]);
        line.color = g == &b.p1_high ? "#d62728" : "#1f77b4";
        line.opacity = 0.6;
        c.series.push_back(std::move(line));
      }
    svg::write(dir / "p1_entropy.svg", svg::render(c));
  }
  if (const auto* v = find(vs, "P2")) {
    svg::Chart c{"Reliability against agent-to-human ratio", "r", "reliability"};
    svg::Series pts{b.p2_r, b.p2_reliability};
    pts.points = true;
    c.series.push_back(pts);
    double rs = stat(v->effect, "r_star");
    if (std::isfinite(rs)) c.vlines.push_back(rs);
    svg::write(dir / "p2_reliability.svg", svg::render(c));
  }
  if (const auto* v = find(vs, "P3")) {
    svg::write(dir / "p3_ei.svg",
               svg::render_bars("Effective information", {"micro", "macro", "ce"},
                                {stat(v->statistics, "ei_micro"), stat(v->statistics, "ei_macro"),
                                 stat(v->effect, "ce")},
                                "bits"));
  }
  if (const auto* v = find(vs, "P4")) {
    svg::Chart c{"Change rate against agent count", "log n", "log rate"};
    svg::Series pts;
    pts.points = true;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& o : b.p4_rates) {
      if (o.n <= 0 || o.rate <= 0) continue;
      pts.x.push_back(std::log(o.n));
      pts.y.push_back(std::log(o.rate));
      lo = std::min(lo, pts.x.back()), hi = std::max(hi, pts.x.back());
    }
    c.series.push_back(pts);
    double a = stat(v->statistics, "alpha_hat"), k = stat(v->effect, "prefactor");
    if (std::isfinite(a) && std::isfinite(k) && k > 0 && std::isfinite(lo)) {
      svg::Series fit{{lo, hi}, {std::log(k) + a * lo, std::log(k) + a * hi}};
      fit.color = "#d62728";
      c.series.push_back(fit);
    }
    svg::write(dir / "p4_rates.svg", svg::render(c));
  }
  if (find(vs, "P7") && !b.p7_clustering.empty()) {
    // Occurrence rate per clustering decile.
    std::vector<std::size_t> idx(b.p7_clustering.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return b.p7_clustering[x] < b.p7_clustering[y]; });
    svg::Chart c{"Cascade occurrence against clustering", "clustering (decile mean)", "occurrence rate"};
    svg::Series pts;
    pts.points = true;
    for (std::size_t d = 0; d < 10; ++d) {
      std::size_t from = d * idx.size() / 10, to = (d + 1) * idx.size() / 10;
      if (to <= from) continue;
      double xs = 0, ys = 0;
      for (std::size_t i = from; i < to; ++i) xs += b.p7_clustering[idx[i]], ys += b.p7_occurrence[idx[i]];
      pts.x.push_back(xs / static_cast<double>(to - from));
      pts.y.push_back(ys / static_cast<double>(to - from));
    }
    c.series.push_back(pts);
    svg::write(dir / "p7_cascades.svg", svg::render(c));
  }
}

int cmd_test(const TestArgs& a) {
  if (a.bundle.empty() == a.world.empty()) {
    std::cerr << "test-propositions: give exactly one of --bundle or --world\n";
    return kUsage;
  }
  Bundle b;
  if (!a.bundle.empty()) {
    b = read_bundle(a.bundle);
  } else {
    BundleOptions bo;
    bo.seed = a.seed;
    b = make_bundle(a.world, bo);
  }
  if (!a.events.empty()) b.events = read_events(a.events);

  BatteryOptions opt;
  opt.harness.alpha = a.alpha;
  opt.harness.seed = a.seed;
  opt.harness.bonferroni = a.bonferroni;
  opt.p6.theta = a.theta;
  opt.p6.rho = a.rho;
  opt.dt = a.dt;
  if (!a.propositions.empty()) {
    opt.propositions.clear();
    for (auto id : split_list(a.propositions)) {
      std::transform(id.begin(), id.end(), id.begin(), [](unsigned char ch) { return std::toupper(ch); });
      if (id.size() != 2 || id[0] != 'P' || id[1] < '1' || id[1] > '7')
        throw Error(ErrorKind::InvalidArgument, "unknown proposition " + id);
      opt.propositions.insert(id);
    }
    if (opt.harness.bonferroni) opt.harness.family_size = opt.propositions.size();
  }
  auto verdicts = run_battery(b, opt);
  auto j = props::to_json(verdicts);
  if (!a.report.empty()) {
    auto os = open_out(a.report);
    os << j.dump(2) << '\n';
    finish(os, a.report);
  }
  if (!a.plots.empty()) write_plots(b, verdicts, a.plots);
  for (const auto& v : verdicts) {
    std::cout << v.id << ' ' << props::to_string(v.verdict);
    for (const auto& w : v.warnings) std::cout << "  [" << w << ']';
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal-emergence laboratory for AI-native software ecosystems"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run the ecosystem simulator");
  simulate->add_option("--config", sa.config, "key = value config file");
  simulate->add_option("--preset", sa.preset, "named preset")->check(CLI::IsMember(sim::preset_names()));
  simulate->add_option("--seed", sa.seed, "run seed");
  simulate->add_option("--out", sa.out, "event log (JSONL)")->required();
  simulate->add_option("--truth", sa.truth, "ground-truth trace (JSONL)");

  IngestArgs ia;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert repository evidence into a canonical event log");
  ingest_cmd->require_subcommand(1);
  auto* git = ingest_cmd->add_subcommand("git", "line-oriented git history dump");
  auto* jsonl = ingest_cmd->add_subcommand("jsonl", "canonical JSONL events");
  for (auto* sub : {git, jsonl}) {
    sub->add_option("--log", ia.log, "input log")->required();
    sub->add_option("--ci", ia.ci, "CI records (JSONL)");
    sub->add_option("--reviews", ia.reviews, "review records (JSONL)");
    sub->add_option("--deps", ia.deps, "dependency snapshots (JSONL)");
    sub->add_option("--out", ia.out, "output event log (JSONL)")->required();
  }
  git->add_option("--ai-authors", ia.ai_authors, "comma-separated regular expressions for AI authors");
  git->add_option("--module-depth", ia.module_depth, "path segments per module")->check(CLI::PositiveNumber);

  MeasureArgs ma;
  auto* measure = app.add_subcommand("measure", "Build the micro/macro state series and cascades");
  measure->add_option("--events", ma.events, "event log (JSONL)")->required();
  measure->add_option("--dt", ma.dt, "window length in seconds")->check(CLI::PositiveNumber);
  measure->add_option("--deps", ma.deps, "dependency snapshots (JSONL)");
  measure->add_option("--out-series", ma.out_series, "series CSV")->required();
  measure->add_option("--out-tensor", ma.out_tensor, "communication tensor CSV");
  measure->add_option("--out-cascades", ma.out_cascades, "cascade CSV");
  measure->add_flag("--heuristic-edges", ma.heuristic, "infer trigger edges from CI failures");
  measure->add_option("--horizon", ma.horizon, "heuristic edge horizon in seconds");

  EiArgs ea;
  auto* ei_cmd = app.add_subcommand("ei", "Effective information at micro and macro level");
  ei_cmd->add_option("--series", ea.series, "series CSV from measure")->required();
  ei_cmd->add_option("--bins", ea.bins, "bins per dimension");
  ei_cmd->add_option("--budget", ea.budget, "maximum micro states");
  ei_cmd->add_option("--bootstrap", ea.bootstrap, "bootstrap resamples");
  ei_cmd->add_option("--seed", ea.seed, "bootstrap seed");
  ei_cmd->add_option("--alpha", ea.alpha, "significance level");
  ei_cmd->add_option("--variant", ea.variant, "EI definition")->check(CLI::IsMember({"canonical", "kl-uniform"}));
  ei_cmd->add_option("--intervention", ea.intervention, "intervention distribution")
      ->check(CLI::IsMember({"uniform", "empirical"}));
  ei_cmd->add_option("--out", ea.out, "report JSON")->required();

  BundleArgs ba;
  auto* bundle = app.add_subcommand("bundle", "Generate the simulated inputs of every proposition test");
  bundle->add_option("--world", ba.world, "preset")->check(CLI::IsMember(sim::preset_names()));
  bundle->add_option("--seed", ba.seed, "bundle seed");
  bundle->add_option("--out", ba.out, "output directory")->required();

  TestArgs ta;
  auto* test = app.add_subcommand("test-propositions", "Run the proposition battery");
  test->add_option("--bundle", ta.bundle, "bundle directory");
  test->add_option("--world", ta.world, "simulate a bundle for this preset")->check(CLI::IsMember(sim::preset_names()));
  test->add_option("--events", ta.events, "event log for P3 and P6 (replaces the bundle's)");
  test->add_option("--propositions", ta.propositions, "comma-separated subset, e.g. p1,p4");
  test->add_option("--alpha", ta.alpha, "significance level");
  test->add_option("--seed", ta.seed, "seed for permutations, bootstraps and --world");
  test->add_flag("--bonferroni", ta.bonferroni, "divide alpha by the number of propositions run");
  test->add_option("--theta", ta.theta, "P6 complexity threshold (default: 75th percentile)");
  test->add_option("--rho", ta.rho, "P6 review-depth threshold");
  test->add_option("--dt", ta.dt, "window length in seconds for P3 and P6")->check(CLI::PositiveNumber);
  test->add_option("--report", ta.report, "verdict report JSON");
  test->add_option("--plots", ta.plots, "directory for SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sa);
    if (git->parsed()) return cmd_ingest(ia, true);
    if (jsonl->parsed()) return cmd_ingest(ia, false);
    if (measure->parsed()) return cmd_measure(ma);
    if (ei_cmd->parsed()) return cmd_ei(ea);
    if (bundle->parsed()) return cmd_bundle(ba);
    if (test->parsed()) return cmd_test(ta);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
