#pragma once

// Effective Information of discretized state series and the micro/macro
// causal-emergence comparison with a moving-block bootstrap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emergelab/coarse_grain.hpp"
#include "emergelab/error.hpp"
#include "emergelab/rng.hpp"
#include "emergelab/stats.hpp"

namespace emergelab::ei {

enum class BinScheme { Quantile, EqualWidth };

struct DiscreteSequence {
  std::vector<std::size_t> states;  // dense ids in [0, n_states)
  std::size_t n_states = 0;
  std::vector<std::size_t> bins_per_dim;  // effective bins after collapsing
  std::vector<std::size_t> constant_dims;  // flagged and collapsed to one bin
};

namespace detail {

// Quantile bins: the k-th cut sits at the sorted value of rank ceil(kT/K) and a
// value falls above it when strictly greater. A cut equal to the maximum is
// moved to the next distinct value below, so a non-constant column never
// collapses to a single bin.
inline std::vector<std::size_t> quantile_bins(std::span<const double> x, std::size_t K) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  const std::size_t T = v.size();
  std::vector<double> cuts;
  for (std::size_t k = 1; k < K; ++k) {
    std::size_t rank = (k * T + K - 1) / K;
    double c = v[std::max<std::size_t>(rank, 1) - 1];
    if (c == v.back()) {
      auto it = std::lower_bound(v.begin(), v.end(), v.back());
      if (it == v.begin()) continue;
      c = *std::prev(it);
    }
    cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<std::size_t> out(T);
  for (std::size_t i = 0; i < T; ++i)
    out[i] = static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), x[i]) - cuts.begin());
  return out;
}

inline std::vector<std::size_t> equal_width_bins(std::span<const double> x, std::size_t K) {
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  std::vector<std::size_t> out(x.size(), 0);
  double width = (*hi - *lo) / static_cast<double>(K);
  if (width <= 0) return out;
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::min(K - 1, static_cast<std::size_t>(std::floor((x[i] - *lo) / width)));
  return out;
}

// Renumbers bin labels densely (0..b-1, order preserved); returns b.
inline std::size_t densify(std::vector<std::size_t>& bins) {
  std::vector<std::size_t> labels(bins);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (auto& b : bins)
    b = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), b) - labels.begin());
  return labels.size();
}

inline std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t d) {
  std::vector<double> c(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) c[t] = rows[t][d];
  return c;
}

// Joint state ids assigned in lexicographic order of the bin tuples.
inline DiscreteSequence joint_states(const std::vector<std::vector<std::size_t>>& dims,
                                     std::size_t T) {
  std::map<std::vector<std::size_t>, std::size_t> ids;
  std::vector<std::vector<std::size_t>> tuples(T);
  for (std::size_t t = 0; t < T; ++t) {
    tuples[t].reserve(dims.size());
    for (const auto& d : dims) tuples[t].push_back(d[t]);
    ids.emplace(tuples[t], 0);
  }
  std::size_t next = 0;
  for (auto& [_, id] : ids) id = next++;
  DiscreteSequence out;
  out.n_states = ids.size();
  out.states.resize(T);
  for (std::size_t t = 0; t < T; ++t) out.states[t] = ids.at(tuples[t]);
  return out;
}

inline std::size_t joint_count(const std::vector<std::vector<std::size_t>>& dims, std::size_t T) {
  std::vector<std::vector<std::size_t>> tuples(T);
  for (std::size_t t = 0; t < T; ++t)
    for (const auto& d : dims) tuples[t].push_back(d[t]);
  std::sort(tuples.begin(), tuples.end());
  return static_cast<std::size_t>(std::unique(tuples.begin(), tuples.end()) - tuples.begin());
}

inline double marginal_entropy(const std::vector<std::size_t>& bins, std::size_t nbins) {
  std::vector<double> c(nbins, 0.0);
  for (auto b : bins) c[b] += 1.0;
  double h = 0.0, T = static_cast<double>(bins.size());
  for (double v : c)
    if (v > 0) h -= v / T * std::log2(v / T);
  return h;
}

}  // namespace detail

// Bins every dimension into at most K bins and maps each time point's bin
// tuple to a dense state id. A dimension that is constant (or entirely NaN)
// is flagged and contributes a single bin.
inline DiscreteSequence discretize(const std::vector<std::vector<double>>& series, std::size_t K,
                                   BinScheme scheme = BinScheme::Quantile) {
  if (K < 2) throw Error(ErrorKind::InvalidArgument, "need at least two bins per dimension");
  if (series.size() < 2) throw Error(ErrorKind::TooShort, "need at least two time points");
  const std::size_t T = series.size(), D = series.front().size();
  for (const auto& row : series)
    if (row.size() != D) throw Error(ErrorKind::MisalignedSeries, "ragged state vectors");

  std::vector<std::vector<std::size_t>> dims;
  std::vector<std::size_t> bins_per_dim, constant;
  for (std::size_t d = 0; d < D; ++d) {
    auto col = detail::column(series, d);
    auto nans = std::count_if(col.begin(), col.end(), [](double v) { return std::isnan(v); });
    if (nans == static_cast<std::ptrdiff_t>(T)) {
      constant.push_back(d);
      bins_per_dim.push_back(1);
      continue;
    }
    if (nans > 0) throw Error(ErrorKind::InvalidArgument, "dimension " + std::to_string(d) + " has gaps");
    auto bins = scheme == BinScheme::Quantile ? detail::quantile_bins(col, K)
                                              : detail::equal_width_bins(col, K);
    auto nb = detail::densify(bins);
    bins_per_dim.push_back(nb);
    if (nb == 1) {
      constant.push_back(d);
      continue;
    }
    dims.push_back(std::move(bins));
  }
  auto out = detail::joint_states(dims, T);
  out.bins_per_dim = std::move(bins_per_dim);
  out.constant_dims = std::move(constant);
  return out;
}

// Reduces per-agent micro features to at most `budget` joint states. Each
// feature column is quantile-binned with K bins; while the joint state count
// exceeds the budget, the column with the lowest marginal entropy loses
// resolution by merging its pair of adjacent bins with the fewest members.
inline DiscreteSequence compress_features(const std::vector<std::vector<double>>& features,
                                          std::size_t budget, std::size_t K = 2) {
  if (budget < 2) throw Error(ErrorKind::InvalidArgument, "state budget must be at least 2");
  if (K < 2) throw Error(ErrorKind::InvalidArgument, "need at least two bins per dimension");
  if (features.size() < 2) throw Error(ErrorKind::TooShort, "need at least two windows");
  const std::size_t T = features.size(), D = features.front().size();

  std::vector<std::vector<std::size_t>> dims;
  std::vector<std::size_t> nbins, constant;
  for (std::size_t d = 0; d < D; ++d) {
    auto col = detail::column(features, d);
    auto bins = detail::quantile_bins(col, K);
    auto nb = detail::densify(bins);
    if (nb == 1) {
      constant.push_back(d);
      continue;
    }
    dims.push_back(std::move(bins));
    nbins.push_back(nb);
  }

  while (!dims.empty() && detail::joint_count(dims, T) > budget) {
    std::size_t pick = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < dims.size(); ++d) {
      double h = detail::marginal_entropy(dims[d], nbins[d]);
      if (h < lowest) lowest = h, pick = d;
    }
    auto& bins = dims[pick];
    std::vector<std::size_t> occupancy(nbins[pick], 0);
    for (auto b : bins) ++occupancy[b];
    std::size_t merge_at = 0, smallest = std::numeric_limits<std::size_t>::max();
    for (std::size_t b = 0; b + 1 < nbins[pick]; ++b)
      if (occupancy[b] + occupancy[b + 1] < smallest) smallest = occupancy[b] + occupancy[b + 1], merge_at = b;
    for (auto& b : bins)
      if (b > merge_at) --b;
    if (--nbins[pick] == 1) {
      dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(pick));
      nbins.erase(nbins.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  auto out = detail::joint_states(dims, T);
  out.bins_per_dim = nbins;
  out.constant_dims = std::move(constant);
  return out;
}

inline DiscreteSequence compress_micro(std::span<const MicroState> series, std::size_t budget,
                                       std::size_t K = 2) {
  std::vector<std::vector<double>> features;
  features.reserve(series.size());
  for (const auto& m : series) features.push_back(micro_features(m));
  return compress_features(features, budget, K);
}

// Row-stochastic transition matrix with the raw counts it was built from.
struct TransitionMatrix {
  std::size_t n = 0;
  std::vector<double> p;       // row-major n x n
  std::vector<double> counts;  // row-major n x n

  double operator()(std::size_t i, std::size_t j) const { return p[i * n + j]; }
  std::span<const double> row(std::size_t i) const { return {p.data() + i * n, n}; }

  static TransitionMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    TransitionMatrix T;
    T.n = rows.size();
    for (const auto& r : rows) {
      if (r.size() != T.n) throw Error(ErrorKind::InvalidArgument, "transition matrix must be square");
      double s = 0.0;
      for (double v : r) {
        if (!(v >= 0.0)) throw Error(ErrorKind::FieldOutOfRange, "negative transition probability");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-9) throw Error(ErrorKind::FieldOutOfRange, "row does not sum to 1");
      T.p.insert(T.p.end(), r.begin(), r.end());
    }
    T.counts.assign(T.n * T.n, 0.0);
    return T;
  }
};

// Smoothed estimate from explicit (from, to) pairs: row i is
// (count(i->j) + alpha) / (sum_j count(i->j) + n alpha); rows with no
// observations are uniform.
inline TransitionMatrix estimate_from_counts(std::vector<double> counts, std::size_t n, double alpha) {
  if (alpha < 0) throw Error(ErrorKind::InvalidArgument, "smoothing must be non-negative");
  TransitionMatrix T;
  T.n = n;
  T.counts = std::move(counts);
  T.p.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += T.counts[i * n + j];
    double denom = total + static_cast<double>(n) * alpha;
    for (std::size_t j = 0; j < n; ++j)
      T.p[i * n + j] = denom > 0 ? (T.counts[i * n + j] + alpha) / denom : 1.0 / static_cast<double>(n);
  }
  return T;
}

inline TransitionMatrix estimate_transitions(std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                             std::size_t n, double alpha) {
  std::vector<double> counts(n * n, 0.0);
  for (auto [a, b] : pairs) {
    if (a >= n || b >= n) throw Error(ErrorKind::FieldOutOfRange, "state id outside state space");
    counts[a * n + b] += 1.0;
  }
  return estimate_from_counts(std::move(counts), n, alpha);
}

// From a state sequence; the state space is [0, n_states) or, when n_states
// is 0, [0, max id].
inline TransitionMatrix estimate_transitions(std::span<const std::size_t> seq, double alpha,
                                             std::size_t n_states = 0) {
  if (seq.size() < 2) throw Error(ErrorKind::TooShort, "need at least one transition");
  std::size_t n = n_states ? n_states : *std::max_element(seq.begin(), seq.end()) + 1;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(seq.size() - 1);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) pairs.emplace_back(seq[t], seq[t + 1]);
  return estimate_transitions(pairs, n, alpha);
}

enum class EiVariant {
  // Mutual information between state and next state under the intervention
  // distribution: mean KL of each row to the intervention-averaged row.
  Canonical,
  // Mean KL of each row to the uniform distribution over next states.
  KlToUniform,
};

inline double kl_bits(std::span<const double> p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j)
    if (p[j] > 0.0) d += p[j] * std::log2(p[j] / q[j]);
  return d;
}

// EI in bits. `intervention` defaults to uniform over the n states.
inline double effective_information(const TransitionMatrix& T, EiVariant variant = EiVariant::Canonical,
                                    std::span<const double> intervention = {}) {
  const std::size_t n = T.n;
  if (n == 0) return 0.0;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  if (!intervention.empty()) {
    if (intervention.size() != n) throw Error(ErrorKind::InvalidArgument, "intervention size");
    double s = std::accumulate(intervention.begin(), intervention.end(), 0.0);
    if (!(s > 0)) throw Error(ErrorKind::InvalidArgument, "intervention weights sum to zero");
    for (std::size_t i = 0; i < n; ++i) w[i] = intervention[i] / s;
  }
  std::vector<double> ref(n, 1.0 / static_cast<double>(n));
  if (variant == EiVariant::Canonical) {
    std::fill(ref.begin(), ref.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ref[j] += w[i] * T(i, j);
  }
  double ei = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0) ei += w[i] * kl_bits(T.row(i), ref);
  return std::max(0.0, ei);
}

enum class Classification { TopHeavy, BottomHeavy, Neutral };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::TopHeavy: return "TOP_HEAVY";
    case Classification::BottomHeavy: return "BOTTOM_HEAVY";
    case Classification::Neutral: return "NEUTRAL";
  }
  return "NEUTRAL";
}

enum class Intervention { Uniform, Empirical };

struct EmergenceOptions {
  double smoothing = 0.5;
  std::size_t resamples = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  EiVariant variant = EiVariant::Canonical;
  // Empirical reweights each level's intervention by how often each state
  // occurs as a source, for sensitivity checks against the uniform default.
  Intervention intervention = Intervention::Uniform;
};

struct EIResult {
  double ei_micro = 0.0;
  double ei_macro = 0.0;
  double ce = 0.0;
  double p_value = 1.0;           // bootstrap P(ce <= 0)
  double p_value_negative = 1.0;  // bootstrap P(ce >= 0)
  Classification classification = Classification::Neutral;
  std::size_t n_micro_states = 0;
  std::size_t n_macro_states = 0;
  std::size_t resamples = 0;
  std::size_t block_length = 0;
  double smoothing = 0.0;
};

namespace detail {

inline double level_ei(std::span<const std::pair<std::size_t, std::size_t>> pairs, std::size_t n,
                       const EmergenceOptions& opt) {
  auto T = estimate_transitions(pairs, n, opt.smoothing);
  if (opt.intervention == Intervention::Uniform) return effective_information(T, opt.variant);
  std::vector<double> w(n, 0.0);
  for (auto [a, _] : pairs) w[a] += 1.0;
  return effective_information(T, opt.variant, w);
}

}  // namespace detail

// Compares EI of aligned micro and macro state sequences. Transitions are
// resampled jointly in moving blocks of ceil(T^(1/3)) so no transition is
// fabricated across block seams.
inline EIResult causal_emergence(const DiscreteSequence& micro, const DiscreteSequence& macro,
                                 const EmergenceOptions& opt = {}) {
  if (micro.states.size() != macro.states.size())
    throw Error(ErrorKind::MisalignedSeries, "micro and macro sequences differ in length");
  const std::size_t T = micro.states.size();
  if (T < 2) throw Error(ErrorKind::TooShort, "need at least two windows");

  std::vector<std::pair<std::size_t, std::size_t>> mi, ma;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    mi.emplace_back(micro.states[t], micro.states[t + 1]);
    ma.emplace_back(macro.states[t], macro.states[t + 1]);
  }
  EIResult r;
  r.n_micro_states = micro.n_states;
  r.n_macro_states = macro.n_states;
  r.smoothing = opt.smoothing;
  r.resamples = opt.resamples;
  r.ei_micro = detail::level_ei(mi, micro.n_states, opt);
  r.ei_macro = detail::level_ei(ma, macro.n_states, opt);
  r.ce = r.ei_macro - r.ei_micro;
  r.block_length = stats::cube_root_block(T);

  if (opt.resamples > 0) {
    Rng rng = substream(opt.seed, "ce-bootstrap");
    std::size_t le = 0, ge = 0;
    std::vector<std::pair<std::size_t, std::size_t>> bmi(mi.size()), bma(ma.size());
    for (std::size_t b = 0; b < opt.resamples; ++b) {
      auto idx = stats::moving_block_indices(mi.size(), r.block_length, rng);
      for (std::size_t k = 0; k < idx.size(); ++k) bmi[k] = mi[idx[k]], bma[k] = ma[idx[k]];
      double ce = detail::level_ei(bma, macro.n_states, opt) - detail::level_ei(bmi, micro.n_states, opt);
      if (ce <= 0.0) ++le;
      if (ce >= 0.0) ++ge;
    }
    double B = static_cast<double>(opt.resamples);
    r.p_value = (static_cast<double>(le) + 1.0) / (B + 1.0);
    r.p_value_negative = (static_cast<double>(ge) + 1.0) / (B + 1.0);
  }
  if (r.ce > 0 && r.p_value < opt.alpha) r.classification = Classification::TopHeavy;
  else if (r.ce < 0 && r.p_value_negative < opt.alpha) r.classification = Classification::BottomHeavy;
  return r;
}

inline nlohmann::json to_json(const EIResult& r, std::size_t bins) {
  return {{"ei_micro", r.ei_micro},
          {"ei_macro", r.ei_macro},
          {"ce", r.ce},
          {"p_value", r.p_value},
          {"classification", std::string(to_string(r.classification))},
          {"n_micro_states", r.n_micro_states},
          {"n_macro_states", r.n_macro_states},
          {"bins", bins},
          {"smoothing", r.smoothing},
          {"resamples", r.resamples},
          {"block_length", r.block_length}};
}

}  // namespace emergelab::ei
