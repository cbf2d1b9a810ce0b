#pragma once

// One test per proposition. Each returns a verdict record with the statistics
// it was based on; nothing here reads simulator ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "emergelab/coarse_grain.hpp"
#include "emergelab/effective_information.hpp"
#include "emergelab/rng.hpp"
#include "emergelab/stats.hpp"
#include "emergelab/types.hpp"

namespace emergelab::props {

enum class Verdict { Confirmed, Refuted, Inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Confirmed: return "CONFIRMED";
    case Verdict::Refuted: return "REFUTED";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

struct PropositionVerdict {
  std::string id;
  Verdict verdict = Verdict::Inconclusive;
  std::map<std::string, double> statistics;
  std::map<std::string, double> p_values;
  std::map<std::string, double> effect;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> warnings;
};

struct HarnessOptions {
  double alpha = 0.05;
  std::uint64_t seed = 0;
  // Divide alpha by the number of propositions under test.
  bool bonferroni = false;
  std::size_t family_size = 7;

  double level() const { return bonferroni ? alpha / static_cast<double>(family_size) : alpha; }
};

namespace detail {

inline double finite(double v) {
  if (std::isnan(v)) return v;
  return std::clamp(v, -1e300, 1e300);
}

inline nlohmann::json base_config(const HarnessOptions& opt, const std::string& stream) {
  return {{"alpha", opt.alpha},
          {"level", opt.level()},
          {"bonferroni", opt.bonferroni},
          {"seeds", {{"root", opt.seed}, {"stream", stream}}}};
}

}  // namespace detail

inline nlohmann::json to_json(const PropositionVerdict& v) {
  auto numbers = [](const std::map<std::string, double>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, x] : m) j[k] = std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(detail::finite(x));
    return j;
  };
  return {{"id", v.id},
          {"verdict", std::string(to_string(v.verdict))},
          {"statistics", numbers(v.statistics)},
          {"p_values", numbers(v.p_values)},
          {"effect", numbers(v.effect)},
          {"config", v.config},
          {"warnings", v.warnings}};
}

inline nlohmann::json to_json(std::span<const PropositionVerdict> vs) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

// ------------------------------------------------------------------- P1

inline PropositionVerdict p1_entropy_slopes(const std::vector<std::vector<double>>& high,
                                            const std::vector<std::vector<double>>& low,
                                            const HarnessOptions& opt = {},
                                            std::size_t permutations = 10000) {
  if (high.size() < 2 || low.size() < 2)
    throw Error(ErrorKind::TooFewSeries, "P1 needs at least two series per group");
  auto slopes = [](const std::vector<std::vector<double>>& group) {
    std::vector<double> out;
    for (const auto& s : group) {
      if (s.size() < 10) throw Error(ErrorKind::TooShort, "P1 series need at least 10 points");
      out.push_back(stats::trend_slope(s));
    }
    return out;
  };
  auto sh = slopes(high), sl = slopes(low);
  Rng rng = substream(opt.seed, "p1");
  auto perm = stats::two_sample_permutation_test(sh, sl, permutations, rng);

  PropositionVerdict v;
  v.id = "P1";
  v.statistics = {{"mean_slope_high", stats::mean(sh)},
                  {"mean_slope_low", stats::mean(sl)},
                  {"n_high", static_cast<double>(sh.size())},
                  {"n_low", static_cast<double>(sl.size())},
                  {"permutations", static_cast<double>(permutations)}};
  v.p_values = {{"greater", perm.p_greater}, {"less", perm.p_less}};
  v.effect = {{"slope_difference", perm.observed}};
  v.config = detail::base_config(opt, "p1");
  v.verdict = perm.observed > 0 && perm.p_greater < opt.level() ? Verdict::Confirmed : Verdict::Refuted;
  return v;
}

// ------------------------------------------------------------------- P2

struct BreakFit {
  std::size_t index = 0;  // first point of the second segment
  double sse = 0.0;
  double sup_f = 0.0;
};

namespace detail {

// Single mean-shift break minimising the pooled SSE, searched over second
// segments starting in [trim, n - trim].
inline BreakFit best_break(std::span<const double> y, std::size_t trim) {
  const std::size_t n = y.size();
  std::vector<double> s(n + 1, 0.0), q(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s[i + 1] = s[i] + y[i];
    q[i + 1] = q[i] + y[i] * y[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) {
    double m = static_cast<double>(b - a);
    double sum = s[b] - s[a];
    return std::max(0.0, (q[b] - q[a]) - sum * sum / m);
  };
  const double sse0 = sse(0, n);
  BreakFit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (std::size_t k = trim; k + trim <= n; ++k) {
    double v = sse(0, k) + sse(k, n);
    if (v < best.sse - 1e-15 * (1.0 + sse0)) best.sse = v, best.index = k;
  }
  // Rounding noise in a constant series is not a break.
  if (sse0 <= 1e-24 * static_cast<double>(n)) {
    best.sup_f = 0.0;
  } else if (best.sse <= 1e-12 * sse0) {
    best.sup_f = std::numeric_limits<double>::infinity();
  } else {
    best.sup_f = (sse0 - best.sse) / (best.sse / static_cast<double>(n - 2));
  }
  return best;
}

}  // namespace detail

inline PropositionVerdict p2_changepoint(std::span<const double> r, std::span<const double> reliability,
                                         const HarnessOptions& opt = {}, std::size_t shuffles = 5000) {
  if (r.size() != reliability.size()) throw Error(ErrorKind::MisalignedSeries, "P2: r and reliability differ in length");
  const std::size_t n = r.size();
  if (n < 30) throw Error(ErrorKind::TooShort, "P2 needs at least 30 points");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return r[a] < r[b]; });
  std::vector<double> rs(n), y(n);
  for (std::size_t i = 0; i < n; ++i) rs[i] = r[order[i]], y[i] = reliability[order[i]];

  const std::size_t trim = std::max<std::size_t>(2, n / 10);
  auto fit = detail::best_break(y, trim);

  // Null: constant mean. Residual blocks are shuffled to keep short-range
  // dependence, and the sup-F search is rerun on each shuffle.
  const double mu = stats::mean(y);
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - mu;
  const std::size_t block = stats::cube_root_block(n);
  std::vector<std::vector<double>> blocks;
  for (std::size_t i = 0; i < n; i += block)
    blocks.emplace_back(resid.begin() + static_cast<std::ptrdiff_t>(i),
                        resid.begin() + static_cast<std::ptrdiff_t>(std::min(n, i + block)));
  Rng rng = substream(opt.seed, "p2");
  std::size_t exceed = 0;
  double p = 1.0;
  if (fit.sup_f > 0.0) {
    std::vector<double> ystar;
    ystar.reserve(n);
    for (std::size_t b = 0; b < shuffles; ++b) {
      std::shuffle(blocks.begin(), blocks.end(), rng);
      ystar.clear();
      for (const auto& bl : blocks)
        for (double e : bl) ystar.push_back(mu + e);
      if (detail::best_break(ystar, trim).sup_f >= fit.sup_f * (1.0 - 1e-12)) ++exceed;
    }
    p = (static_cast<double>(exceed) + 1.0) / (static_cast<double>(shuffles) + 1.0);
  }

  const double r_star = rs[fit.index];
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < n; ++i) (i < fit.index ? before : after) += y[i];
  before /= static_cast<double>(fit.index);
  after /= static_cast<double>(n - fit.index);

  PropositionVerdict v;
  v.id = "P2";
  v.statistics = {{"sup_f", fit.sup_f},
                  {"break_index", static_cast<double>(fit.index)},
                  {"n", static_cast<double>(n)},
                  {"shuffles", static_cast<double>(shuffles)},
                  {"block_length", static_cast<double>(block)}};
  v.p_values = {{"sup_f", p}};
  v.effect = {{"r_star", r_star}, {"mean_before", before}, {"mean_after", after}, {"shift", after - before}};
  v.config = detail::base_config(opt, "p2");
  v.config["r_star_range"] = {1.0, 3.0};
  v.config["trim"] = trim;
  if (p >= opt.level()) v.verdict = Verdict::Refuted;
  else if (r_star >= 1.0 && r_star <= 3.0) v.verdict = Verdict::Confirmed;
  else v.verdict = Verdict::Inconclusive;
  return v;
}

// ------------------------------------------------------------------- P3

struct P3Options {
  std::size_t bins = 2;      // K per macro dimension and per micro feature
  std::size_t budget = 16;   // maximum micro joint states
  std::size_t resamples = 1000;
  ei::EiVariant variant = ei::EiVariant::Canonical;
  ei::Intervention intervention = ei::Intervention::Uniform;
};

inline Verdict p3_classify(const ei::EIResult& r) {
  if (r.classification == ei::Classification::TopHeavy) return Verdict::Confirmed;
  if (r.classification == ei::Classification::BottomHeavy || r.ce <= 0.0) return Verdict::Refuted;
  return Verdict::Inconclusive;
}

inline ei::EmergenceOptions emergence_options(const P3Options& p3, const HarnessOptions& opt) {
  ei::EmergenceOptions eo;
  eo.resamples = p3.resamples;
  eo.seed = substream_seed(opt.seed, "p3");
  eo.alpha = opt.level();
  eo.variant = p3.variant;
  eo.intervention = p3.intervention;
  return eo;
}

// Macro vectors are quantile-binned per dimension; micro feature rows are
// compressed to the state budget first.
inline ei::EIResult measure_emergence(const std::vector<std::vector<double>>& macro,
                                      const std::vector<std::vector<double>>& micro_features, const P3Options& p3,
                                      const ei::EmergenceOptions& eo) {
  if (macro.size() != micro_features.size()) throw Error(ErrorKind::MisalignedSeries, "macro and micro lengths differ");
  auto M = ei::discretize(macro, p3.bins);
  auto m = ei::compress_features(micro_features, p3.budget, p3.bins);
  return ei::causal_emergence(m, M, eo);
}

// From already-built macro vectors and micro feature rows.
inline PropositionVerdict p3_from_features(const std::vector<std::vector<double>>& macro,
                                           const std::vector<std::vector<double>>& micro_features,
                                           const P3Options& p3 = {}, const HarnessOptions& opt = {}) {
  if (macro.size() != micro_features.size()) throw Error(ErrorKind::MisalignedSeries, "P3: macro and micro lengths differ");
  if (macro.size() < 100) throw Error(ErrorKind::TooShort, "P3 needs at least 100 windows");
  auto eo = emergence_options(p3, opt);
  auto r = measure_emergence(macro, micro_features, p3, eo);

  PropositionVerdict v;
  v.id = "P3";
  v.statistics = {{"ei_micro", r.ei_micro},
                  {"ei_macro", r.ei_macro},
                  {"windows", static_cast<double>(macro.size())},
                  {"n_micro_states", static_cast<double>(r.n_micro_states)},
                  {"n_macro_states", static_cast<double>(r.n_macro_states)},
                  {"block_length", static_cast<double>(r.block_length)}};
  v.p_values = {{"ce_positive", r.p_value}, {"ce_negative", r.p_value_negative}};
  v.effect = {{"ce", r.ce}};
  v.config = detail::base_config(opt, "p3");
  v.config["bins"] = p3.bins;
  v.config["budget"] = p3.budget;
  v.config["resamples"] = p3.resamples;
  v.config["smoothing"] = eo.smoothing;
  v.config["classification"] = std::string(ei::to_string(r.classification));
  v.verdict = p3_classify(r);
  return v;
}

inline PropositionVerdict p3_emergence(std::span<const CommitEvent> events, const SeriesOptions& series,
                                       const P3Options& p3 = {}, const HarnessOptions& opt = {}) {
  auto s = build_series(events, {}, series);
  std::vector<std::vector<double>> macro, micro;
  for (const auto& w : s.windows) {
    macro.push_back(macro_vector(w.macro));
    micro.push_back(micro_features(w.micro));
  }
  auto v = p3_from_features(macro, micro, p3, opt);
  v.config["dt"] = series.dt;
  return v;
}

// ------------------------------------------------------------------- P4

struct RateObservation {
  double n = 0.0;     // agent count
  double rate = 0.0;  // commits per step
};

inline PropositionVerdict p4_powerlaw(std::span<const RateObservation> obs,
                                      std::span<const std::int64_t> cascade_sizes = {},
                                      const HarnessOptions& opt = {}, std::size_t bootstrap = 2000) {
  std::map<double, std::vector<double>> levels;
  for (const auto& o : obs) {
    if (!(o.n > 0.0) || !(o.rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "P4 needs positive counts and rates");
    levels[o.n].push_back(o.rate);
  }
  std::size_t good = 0;
  for (const auto& [n, rates] : levels) good += rates.size() >= 3;
  if (levels.size() < 4 || good < levels.size())
    throw Error(ErrorKind::TooFewLevels, "P4 needs at least 4 agent counts with 3 replicates each");

  auto fit = [](const std::map<double, std::vector<double>>& lv) {
    std::vector<double> x, y;
    for (const auto& [n, rates] : lv)
      for (double r : rates) x.push_back(std::log(n)), y.push_back(std::log(r));
    return stats::ols(x, y);
  };
  auto full = fit(levels);
  const double alpha_hat = full.slope;

  // Replicates are resampled within each level. With three or four
  // replicates a plain resample understates the spread by (m-1)/m, so the
  // drawn log-deviations from the level mean are scaled back up.
  std::map<double, std::pair<double, double>> centre;  // log mean, inflation
  for (const auto& [n, rates] : levels) {
    double m = static_cast<double>(rates.size()), sum = 0.0;
    for (double r : rates) sum += std::log(r);
    centre[n] = {sum / m, std::sqrt(m / (m - 1.0))};
  }
  Rng rng = substream(opt.seed, "p4");
  std::vector<double> boot;
  boot.reserve(bootstrap);
  std::map<double, std::vector<double>> resampled = levels;
  for (std::size_t b = 0; b < bootstrap; ++b) {
    for (auto& [n, rates] : resampled) {
      const auto& src = levels.at(n);
      const auto [mu, inflate] = centre.at(n);
      std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
      for (auto& r : rates) r = std::exp(mu + inflate * (std::log(src[pick(rng)]) - mu));
    }
    boot.push_back(fit(resampled).slope);
  }
  const double level = opt.level();
  double lo = alpha_hat, hi = alpha_hat;
  if (!boot.empty()) {
    lo = stats::quantile(boot, level / 2.0);
    hi = stats::quantile(boot, 1.0 - level / 2.0);
  }

  PropositionVerdict v;
  v.id = "P4";
  v.statistics = {{"alpha_hat", alpha_hat},
                  {"alpha_se", full.slope_se},
                  {"levels", static_cast<double>(levels.size())},
                  {"observations", static_cast<double>(obs.size())},
                  {"bootstrap", static_cast<double>(bootstrap)}};
  v.effect = {{"alpha_ci_low", lo}, {"alpha_ci_high", hi}, {"prefactor", std::exp(full.intercept)}};
  if (boot.size() > 1) {
    double below = static_cast<double>(std::count_if(boot.begin(), boot.end(), [](double a) { return a <= 1.0; }));
    v.p_values["alpha_le_1"] = (below + 1.0) / (static_cast<double>(boot.size()) + 1.0);
  }
  if (cascade_sizes.size() >= 10) {
    try {
      auto pl = stats::fit_powerlaw(cascade_sizes, std::nullopt, 200, substream_seed(opt.seed, "p4-tail"));
      v.statistics["cascade_alpha"] = pl.alpha;
      v.statistics["cascade_xmin"] = static_cast<double>(pl.xmin);
      v.statistics["cascade_tail_n"] = static_cast<double>(pl.n_tail);
      v.statistics["cascade_ks"] = pl.ks;
      if (pl.gof_p) v.p_values["cascade_gof"] = *pl.gof_p;
    } catch (const Error& e) {
      v.warnings.push_back(std::string("cascade tail not fitted: ") + e.what());
    }
  }
  v.config = detail::base_config(opt, "p4");
  constexpr double eps = 1e-9;
  if (alpha_hat > 1.0 + eps && lo > 1.0 + eps) v.verdict = Verdict::Confirmed;
  else if (alpha_hat <= 1.0 + eps) v.verdict = Verdict::Refuted;
  else v.verdict = Verdict::Inconclusive;
  return v;
}

// ------------------------------------------------------------------- P5

inline PropositionVerdict p5_feedback(std::span<const double> intervention, std::span<const double> rules,
                                      std::span<const double> capability, const HarnessOptions& opt = {}) {
  if (intervention.size() != rules.size() || rules.size() != capability.size())
    throw Error(ErrorKind::MisalignedSeries, "P5 series must be aligned");
  if (intervention.size() < 12) throw Error(ErrorKind::TooShort, "P5 needs at least 12 periods");
  auto mi = stats::mann_kendall(intervention);
  auto mr = stats::mann_kendall(rules);
  auto mc = stats::mann_kendall(capability);
  const int max_lag = static_cast<int>(intervention.size() / 4);
  const int lag = stats::lag_of_max_cross_correlation(rules, intervention, max_lag);
  const double level = opt.level();
  const bool up_i = mi.p_increasing < level, up_r = mr.p_increasing < level, up_c = mc.p_increasing < level;

  PropositionVerdict v;
  v.id = "P5";
  v.statistics = {{"mk_s_intervention", static_cast<double>(mi.s)}, {"mk_z_intervention", mi.z},
                  {"mk_s_rules", static_cast<double>(mr.s)},        {"mk_z_rules", mr.z},
                  {"mk_s_capability", static_cast<double>(mc.s)},   {"mk_z_capability", mc.z},
                  {"lead_lag", static_cast<double>(lag)},           {"periods", static_cast<double>(intervention.size())}};
  v.p_values = {{"intervention_increasing", mi.p_increasing},
                {"rules_increasing", mr.p_increasing},
                {"capability_increasing", mc.p_increasing}};
  v.effect = {{"intervention_change", intervention.back() - intervention.front()},
              {"rules_change", rules.back() - rules.front()},
              {"capability_change", capability.back() - capability.front()}};
  v.config = detail::base_config(opt, "p5");
  v.config["max_lag"] = max_lag;
  if (up_i && up_r && up_c && lag <= 0) v.verdict = Verdict::Confirmed;
  else if (!up_i && up_c) v.verdict = Verdict::Refuted;
  else v.verdict = Verdict::Inconclusive;
  return v;
}

// ------------------------------------------------------------------- P6

struct P6Options {
  std::optional<double> theta;  // complexity threshold; default 75th percentile
  double rho = 0.5;             // review-depth threshold
  std::int64_t dt = 86400;
};

inline PropositionVerdict p6_from_fractions(std::span<const double> fractions, const HarnessOptions& opt = {}) {
  if (fractions.size() < 3) throw Error(ErrorKind::TooShort, "P6 needs at least three windows");
  auto mk = stats::mann_kendall(fractions);
  const bool constant = std::all_of(fractions.begin(), fractions.end(), [&](double f) { return f == fractions[0]; });
  PropositionVerdict v;
  v.id = "P6";
  v.statistics = {{"mk_s", static_cast<double>(mk.s)}, {"mk_z", mk.z}, {"windows", static_cast<double>(fractions.size())},
                  {"mean_fraction", stats::mean(fractions)}};
  v.p_values = {{"increasing", mk.p_increasing}, {"decreasing", mk.p_decreasing}};
  v.effect = {{"theil_slope_proxy", stats::trend_slope(fractions)}};
  v.config = detail::base_config(opt, "p6");
  const double level = opt.level();
  if (mk.p_increasing < level) v.verdict = Verdict::Confirmed;
  else if (constant || mk.p_decreasing < level) v.verdict = Verdict::Refuted;
  else v.verdict = Verdict::Inconclusive;
  return v;
}

// Per window, the share of commits (among those reporting complexity) whose
// complexity_delta exceeds theta while reviewed below rho. A commit without a
// review counts as depth 0.
inline std::vector<double> incomprehensibility_fractions(std::span<const CommitEvent> events, double theta,
                                                         double rho, std::int64_t dt) {
  if (events.empty()) throw Error(ErrorKind::EmptyLog, "P6 needs events");
  const std::int64_t start = events.front().timestamp;
  const auto count = static_cast<std::size_t>((events.back().timestamp - start) / dt + 1);
  std::vector<double> hit(count, 0.0), total(count, 0.0);
  for (const auto& e : events) {
    if (!e.complexity_delta) continue;
    auto k = std::min(count - 1, static_cast<std::size_t>((e.timestamp - start) / dt));
    total[k] += 1.0;
    double depth = e.review ? e.review->depth : 0.0;
    if (*e.complexity_delta > theta && depth < rho) hit[k] += 1.0;
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    if (total[k] > 0) out.push_back(hit[k] / total[k]);
  return out;
}

inline PropositionVerdict p6_comprehension(std::span<const CommitEvent> events, const P6Options& p6 = {},
                                           const HarnessOptions& opt = {}) {
  std::vector<double> cd;
  for (const auto& e : events)
    if (e.complexity_delta) cd.push_back(*e.complexity_delta);
  if (cd.empty()) throw Error(ErrorKind::MissingFields, "P6 needs complexity_delta on at least one commit");
  const double theta = p6.theta.value_or(stats::quantile(cd, 0.75));
  auto fractions = incomprehensibility_fractions(events, theta, p6.rho, p6.dt);
  auto v = p6_from_fractions(fractions, opt);
  v.config["proxies"] = {{"theta", theta}, {"theta_default", !p6.theta.has_value()}, {"rho", p6.rho}, {"dt", p6.dt}};
  v.warnings.push_back("legibility is measured by a declared proxy (complexity_delta > theta with review depth < rho)");
  return v;
}

// ------------------------------------------------------------------- P7

inline PropositionVerdict p7_cascade_topology(std::span<const double> occurrence, std::span<const double> clustering,
                                              std::span<const double> density, const HarnessOptions& opt = {},
                                              std::size_t bootstrap = 1000) {
  const std::size_t n = occurrence.size();
  if (clustering.size() != n || density.size() != n) throw Error(ErrorKind::MisalignedSeries, "P7 inputs must be aligned");
  if (n < 50) throw Error(ErrorKind::TooShort, "P7 needs at least 50 windows");
  auto varies = [](std::span<const double> x) {
    return std::any_of(x.begin(), x.end(), [&](double v) { return v != x[0]; });
  };
  if (!varies(occurrence)) throw Error(ErrorKind::NoVariation, "cascade occurrence is constant");
  if (!varies(clustering) || !varies(density)) throw Error(ErrorKind::NoVariation, "a topology regressor is constant");

  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = clustering[i];
    X(i, 2) = density[i];
    y[i] = occurrence[i] > 0.5 ? 1.0 : 0.0;
  }
  PropositionVerdict v;
  v.id = "P7";
  double ridge = 0.0;
  auto full = stats::logistic_irls(X, y);
  if (stats::separation_suspected(full, n)) {
    ridge = 1.0;
    full = stats::logistic_irls(X, y, ridge);
    v.warnings.push_back("SeparationDetected: coefficients are ridge-stabilised (lambda = 1)");
  }
  auto reduced = [&](Eigen::Index drop) {
    Eigen::MatrixXd Xr(n, 2);
    Xr.col(0) = X.col(0);
    Xr.col(1) = X.col(drop == 1 ? 2 : 1);
    return stats::logistic_irls(Xr, y, ridge).log_likelihood;
  };
  const double lr_c = std::max(0.0, 2.0 * (full.log_likelihood - reduced(1)));
  const double lr_d = std::max(0.0, 2.0 * (full.log_likelihood - reduced(2)));
  const double p_c = stats::chi2_sf(lr_c, 1.0), p_d = stats::chi2_sf(lr_d, 1.0);

  v.statistics = {{"beta_intercept", full.beta[0]}, {"beta_clustering", full.beta[1]}, {"beta_density", full.beta[2]},
                  {"lr_clustering", lr_c},          {"lr_density", lr_d},              {"windows", static_cast<double>(n)},
                  {"events", y.sum()},              {"ridge", ridge}};
  v.p_values = {{"clustering", p_c}, {"density", p_d}};

  if (bootstrap > 0) {
    Rng rng = substream(opt.seed, "p7");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::vector<double>> draws(3);
    Eigen::MatrixXd Xb(n, 3);
    Eigen::VectorXd yb(n);
    for (std::size_t b = 0; b < bootstrap; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        auto k = pick(rng);
        Xb.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(k));
        yb[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(k)];
      }
      auto f = stats::logistic_irls(Xb, yb, ridge);
      for (int j = 0; j < 3; ++j) draws[j].push_back(f.beta[j]);
    }
    const double level = opt.level();
    const char* names[] = {"intercept", "clustering", "density"};
    for (int j = 0; j < 3; ++j) {
      v.effect[std::string(names[j]) + "_ci_low"] = stats::quantile(draws[j], level / 2.0);
      v.effect[std::string(names[j]) + "_ci_high"] = stats::quantile(draws[j], 1.0 - level / 2.0);
    }
  }
  v.effect["odds_ratio_clustering"] = std::exp(full.beta[1]);
  v.effect["odds_ratio_density"] = std::exp(full.beta[2]);
  v.config = detail::base_config(opt, "p7");
  v.config["bootstrap"] = bootstrap;
  v.config["link"] = "logit";
  const double level = opt.level();
  if (full.beta[1] > 0 && full.beta[2] > 0 && p_c < level && p_d < level) v.verdict = Verdict::Confirmed;
  else if (p_c >= level && p_d >= level) v.verdict = Verdict::Refuted;
  else v.verdict = Verdict::Inconclusive;
  return v;
}

}  // namespace emergelab::props
