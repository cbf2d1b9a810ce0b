#pragma once

// Statistical primitives behind the proposition tests: OLS, Mann-Kendall,
// discrete power-law MLE, logistic IRLS, permutation and bootstrap helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>

#include "emergelab/error.hpp"
#include "emergelab/rng.hpp"

namespace emergelab::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sample variance (n - 1 denominator).
inline double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  double m = mean(x), s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double chi2_sf(double x, double dof) {
  if (!(x > 0.0)) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

// Linear-interpolated quantile (R type 7).
inline double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of empty sample");
  std::sort(x.begin(), x.end());
  double h = (static_cast<double>(x.size()) - 1.0) * q;
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

// Average ranks (1-based); ties share the mean of their positions.
inline std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  double mx = mean(x), my = mean(y), sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double residual_ss = 0.0;
  std::size_t n = 0;
};

inline OlsFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::MisalignedSeries, "ols: x and y differ in length");
  if (x.size() < 2) throw Error(ErrorKind::TooShort, "ols needs at least two points");
  double mx = mean(x), my = mean(y), sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::NoVariation, "ols: regressor is constant");
  OlsFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    f.residual_ss += r * r;
  }
  if (f.n > 2) f.slope_se = std::sqrt(f.residual_ss / static_cast<double>(f.n - 2) / sxx);
  return f;
}

// Slope of y against its index 0..n-1.
inline double trend_slope(std::span<const double> y) {
  std::vector<double> t(y.size());
  std::iota(t.begin(), t.end(), 0.0);
  return ols(t, y).slope;
}

struct SpearmanResult {
  double rho = 0.0;
  double p_greater = 1.0;  // one-sided, H1: rho > 0
};

inline SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::MisalignedSeries, "spearman: length mismatch");
  if (x.size() < 3) throw Error(ErrorKind::TooShort, "spearman needs at least three points");
  auto rx = ranks(x), ry = ranks(y);
  SpearmanResult r;
  r.rho = pearson(rx, ry);
  double n = static_cast<double>(x.size());
  if (r.rho >= 1.0) {
    r.p_greater = 0.0;
  } else {
    double t = r.rho * std::sqrt((n - 2.0) / (1.0 - r.rho * r.rho));
    r.p_greater = boost::math::cdf(boost::math::complement(boost::math::students_t(n - 2.0), t));
  }
  return r;
}

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

// Pearson chi-square test of independence on a contingency table. Empty
// rows and columns are dropped before counting degrees of freedom.
inline ChiSquareResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  std::vector<double> rows, cols;
  std::vector<std::size_t> keep_r, keep_c;
  std::size_t ncol = table.empty() ? 0 : table.front().size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    double s = std::accumulate(table[i].begin(), table[i].end(), 0.0);
    if (s > 0) keep_r.push_back(i), rows.push_back(s);
  }
  for (std::size_t j = 0; j < ncol; ++j) {
    double s = 0;
    for (auto i : keep_r) s += table[i][j];
    if (s > 0) keep_c.push_back(j), cols.push_back(s);
  }
  ChiSquareResult r;
  if (keep_r.size() < 2 || keep_c.size() < 2) return r;
  double total = std::accumulate(rows.begin(), rows.end(), 0.0);
  for (std::size_t a = 0; a < keep_r.size(); ++a)
    for (std::size_t b = 0; b < keep_c.size(); ++b) {
      double e = rows[a] * cols[b] / total;
      double o = table[keep_r[a]][keep_c[b]];
      r.statistic += (o - e) * (o - e) / e;
    }
  r.dof = static_cast<double>((keep_r.size() - 1) * (keep_c.size() - 1));
  r.p_value = chi2_sf(r.statistic, r.dof);
  return r;
}

// ---------------------------------------------------------------- Mann-Kendall

inline std::int64_t mann_kendall_s(std::span<const double> x) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
  return s;
}

struct MannKendall {
  std::int64_t s = 0;
  double variance = 0.0;  // tie-corrected
  double z = 0.0;
  double p_increasing = 1.0;
  double p_decreasing = 1.0;
  bool exact = false;
  std::size_t n = 0;
};

namespace detail {

// Null distribution of S for n distinct values, via inversion counts
// (Mahonian numbers). counts[k] = permutations with k inversions.
inline std::vector<double> inversion_counts(std::size_t n) {
  std::vector<double> c{1.0};
  for (std::size_t m = 2; m <= n; ++m) {
    std::vector<double> next(c.size() + m - 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k)
      for (std::size_t add = 0; add < m; ++add) next[k + add] += c[k];
    c = std::move(next);
  }
  return c;
}

}  // namespace detail

inline constexpr std::size_t kMannKendallExactMax = 10;

inline MannKendall mann_kendall(std::span<const double> x) {
  MannKendall r;
  r.n = x.size();
  if (r.n < 2) throw Error(ErrorKind::TooShort, "Mann-Kendall needs at least two points");
  r.s = mann_kendall_s(x);

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  double n = static_cast<double>(r.n);
  double var = n * (n - 1) * (2 * n + 5);
  bool ties = false;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    double t = static_cast<double>(j - i + 1);
    if (t > 1) ties = true;
    var -= t * (t - 1) * (2 * t + 5);
    i = j + 1;
  }
  r.variance = var / 18.0;
  if (r.variance > 0) {
    double sd = std::sqrt(r.variance);
    if (r.s > 0) r.z = (static_cast<double>(r.s) - 1.0) / sd;
    else if (r.s < 0) r.z = (static_cast<double>(r.s) + 1.0) / sd;
  }

  if (r.n <= kMannKendallExactMax) {
    r.exact = true;
    double ge = 0, le = 0, total = 0;
    if (!ties) {
      auto counts = detail::inversion_counts(r.n);
      auto pairs = static_cast<std::int64_t>(r.n * (r.n - 1) / 2);
      for (std::size_t k = 0; k < counts.size(); ++k) {
        std::int64_t s = pairs - 2 * static_cast<std::int64_t>(k);
        total += counts[k];
        if (s >= r.s) ge += counts[k];
        if (s <= r.s) le += counts[k];
      }
    } else {
      // Distinct arrangements of the multiset are equally likely under
      // exchangeability, so enumerating them gives the exact null.
      auto perm = sorted;
      do {
        auto s = mann_kendall_s(perm);
        total += 1;
        if (s >= r.s) ge += 1;
        if (s <= r.s) le += 1;
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    r.p_increasing = ge / total;
    r.p_decreasing = le / total;
  } else if (r.variance > 0) {
    r.p_increasing = normal_sf(r.z);
    r.p_decreasing = normal_cdf(r.z);
  } else {
    r.p_increasing = r.p_decreasing = 0.5;
  }
  return r;
}

// ------------------------------------------------------------ power-law fit

// Hurwitz zeta sum_{k>=0} (q + k)^-s for s > 1, q > 0, by Euler-Maclaurin
// summation after twelve explicit terms.
inline double hurwitz_zeta(double s, double q) {
  constexpr int kDirect = 12;
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(q + k, -s);
  const double a = q + kDirect;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  // B_2j / (2j)!
  static constexpr double kB[] = {1.0 / 12, -1.0 / 720, 1.0 / 30240, -1.0 / 1209600, 1.0 / 47900160};
  double rising = s * std::pow(a, -s - 1.0);
  for (int j = 0; j < 5; ++j) {
    sum += kB[j] * rising;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2) / (a * a);
  }
  return sum;
}

// Discrete power law P(X = x) = x^-alpha / zeta(alpha, xmin) on x >= xmin.
// Survival values near xmin are tabulated, so repeated sampling and KS
// evaluation stay cheap.
class DiscretePowerLaw {
 public:
  DiscretePowerLaw(std::int64_t xmin, double alpha, std::size_t table = 4096)
      : xmin_(xmin), alpha_(alpha), z0_(hurwitz_zeta(alpha, static_cast<double>(xmin))) {
    if (xmin < 1) throw Error(ErrorKind::InvalidArgument, "xmin must be >= 1");
    if (!(alpha > 1.0)) throw Error(ErrorKind::InvalidArgument, "power-law exponent must exceed 1");
    surv_.reserve(table);
    double s = 1.0;
    for (std::size_t k = 0; k < table; ++k) {
      surv_.push_back(s);
      s -= std::pow(static_cast<double>(xmin + static_cast<std::int64_t>(k)), -alpha) / z0_;
    }
  }

  // P(X >= x)
  double survival(std::int64_t x) const {
    if (x <= xmin_) return 1.0;
    auto k = static_cast<std::size_t>(x - xmin_);
    if (k < surv_.size()) return surv_[k];
    return hurwitz_zeta(alpha_, static_cast<double>(x)) / z0_;
  }

  // Inverse CDF: the largest x with P(X >= x) >= v.
  std::int64_t sample(Rng& rng) const {
    const double v = 1.0 - uniform01(rng);
    std::int64_t lo = xmin_, hi = xmin_ + 1;
    while (survival(hi) >= v) {
      lo = hi;
      hi = xmin_ + 2 * (hi - xmin_);
      if (hi > (std::int64_t{1} << 52)) return lo;
    }
    while (hi - lo > 1) {
      auto mid = lo + (hi - lo) / 2;
      (survival(mid) >= v ? lo : hi) = mid;
    }
    return lo;
  }

  std::int64_t xmin() const { return xmin_; }
  double alpha() const { return alpha_; }

 private:
  std::int64_t xmin_;
  double alpha_, z0_;
  std::vector<double> surv_;
};

inline std::int64_t sample_discrete_powerlaw(Rng& rng, std::int64_t xmin, double alpha) {
  return DiscretePowerLaw(xmin, alpha, 64).sample(rng);
}

// Closed-form MLE for continuous data on x >= xmin: 1 + m / sum ln(x / xmin).
inline double continuous_powerlaw_alpha(std::span<const double> sample, double xmin) {
  if (!(xmin > 0.0)) throw Error(ErrorKind::InvalidArgument, "xmin must be positive");
  double sum = 0.0;
  std::size_t m = 0;
  for (double x : sample)
    if (x >= xmin) sum += std::log(x / xmin), ++m;
  if (m == 0 || sum <= 0.0) throw Error(ErrorKind::TooShort, "no spread in power-law tail");
  return 1.0 + static_cast<double>(m) / sum;
}

// Exact discrete MLE: maximises -alpha sum ln x - m ln zeta(alpha, xmin) over
// the tail x >= xmin.
inline double discrete_powerlaw_alpha(std::span<const std::int64_t> sample, std::int64_t xmin) {
  if (xmin < 1) throw Error(ErrorKind::InvalidArgument, "xmin must be >= 1");
  double sum_log = 0.0;
  std::size_t m = 0;
  bool spread = false;
  for (auto x : sample)
    if (x >= xmin) {
      sum_log += std::log(static_cast<double>(x));
      spread = spread || x > xmin;
      ++m;
    }
  if (m == 0 || !spread) throw Error(ErrorKind::TooShort, "no spread in power-law tail");
  const double q = static_cast<double>(xmin), n = static_cast<double>(m);
  auto neg_ll = [&](double a) { return a * sum_log + n * std::log(hurwitz_zeta(a, q)); };
  auto [alpha, _] = boost::math::tools::brent_find_minima(neg_ll, 1.0 + 1e-6, 20.0, 40);
  return alpha;
}

// Kolmogorov-Smirnov distance between the empirical tail CDF and the model.
inline double powerlaw_ks(std::span<const std::int64_t> sample, const DiscretePowerLaw& model) {
  std::vector<std::int64_t> tail;
  for (auto x : sample)
    if (x >= model.xmin()) tail.push_back(x);
  if (tail.empty()) return 1.0;
  std::sort(tail.begin(), tail.end());
  double m = static_cast<double>(tail.size()), d = 0.0;
  for (std::size_t i = 0; i < tail.size();) {
    std::size_t j = i;
    while (j + 1 < tail.size() && tail[j + 1] == tail[i]) ++j;
    double below = static_cast<double>(i) / m;
    double upto = static_cast<double>(j + 1) / m;
    double model_below = 1.0 - model.survival(tail[i]);
    double model_upto = 1.0 - model.survival(tail[i] + 1);
    d = std::max({d, std::abs(below - model_below), std::abs(upto - model_upto)});
    i = j + 1;
  }
  return d;
}

struct PowerLawFit {
  double alpha = 0.0;
  std::int64_t xmin = 1;
  std::size_t n_tail = 0;
  double ks = 0.0;
  std::optional<double> gof_p;  // parametric-bootstrap goodness of fit
};

// Fits the tail exponent. When xmin is not given it is chosen to minimise the
// KS distance over candidate cutoffs leaving at least `min_tail` points.
inline PowerLawFit fit_powerlaw(std::span<const std::int64_t> sample,
                                std::optional<std::int64_t> xmin = std::nullopt,
                                std::size_t gof_resamples = 0, std::uint64_t seed = 0,
                                std::size_t min_tail = 10) {
  auto tail_size = [&](std::int64_t c) {
    return static_cast<std::size_t>(
        std::count_if(sample.begin(), sample.end(), [c](auto x) { return x >= c; }));
  };
  PowerLawFit best;
  if (xmin) {
    best.xmin = *xmin;
    best.alpha = discrete_powerlaw_alpha(sample, *xmin);
    best.ks = powerlaw_ks(sample, DiscretePowerLaw(*xmin, best.alpha));
  } else {
    std::vector<std::int64_t> candidates(sample.begin(), sample.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    best.ks = std::numeric_limits<double>::infinity();
    for (auto c : candidates) {
      if (c < 1) continue;
      if (tail_size(c) < min_tail) break;
      double a;
      try {
        a = discrete_powerlaw_alpha(sample, c);
      } catch (const Error&) {
        continue;
      }
      double d = powerlaw_ks(sample, DiscretePowerLaw(c, a));
      if (d < best.ks) best = {a, c, 0, d, std::nullopt};
    }
    if (!std::isfinite(best.ks)) throw Error(ErrorKind::TooShort, "no admissible power-law cutoff");
  }
  best.n_tail = tail_size(best.xmin);
  if (gof_resamples > 0) {
    Rng rng = substream(seed, "powerlaw-gof");
    DiscretePowerLaw model(best.xmin, best.alpha);
    std::size_t worse = 0;
    std::vector<std::int64_t> synth(best.n_tail);
    for (std::size_t b = 0; b < gof_resamples; ++b) {
      for (auto& v : synth) v = model.sample(rng);
      double a;
      try {
        a = discrete_powerlaw_alpha(synth, best.xmin);
      } catch (const Error&) {
        ++worse;
        continue;
      }
      if (powerlaw_ks(synth, DiscretePowerLaw(best.xmin, a)) >= best.ks) ++worse;
    }
    best.gof_p = static_cast<double>(worse) / static_cast<double>(gof_resamples);
  }
  return best;
}

// ---------------------------------------------------------- logistic IRLS

struct LogisticFit {
  Eigen::VectorXd beta;
  double log_likelihood = 0.0;  // unpenalised
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // penalised log-likelihood per iteration
};

namespace detail {

inline double log1pexp(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

inline double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - log1pexp(eta[i]);
  return ll;
}

}  // namespace detail

// Newton-Raphson / IRLS with step halving, so the (penalised) objective never
// decreases. `ridge` penalises every coefficient except column 0.
inline LogisticFit logistic_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 double ridge = 0.0, int max_iter = 100, double tol = 1e-8) {
  const Eigen::Index p = X.cols();
  LogisticFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);
  auto objective = [&](const Eigen::VectorXd& b) {
    double pen = ridge > 0 ? 0.5 * ridge * b.tail(p - 1).squaredNorm() : 0.0;
    return detail::logistic_loglik(X, y, b) - pen;
  };
  Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 1; j < p; ++j) penalty(j, j) = ridge;

  double obj = objective(fit.beta);
  fit.objective_trace.push_back(obj);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd eta = X * fit.beta;
    Eigen::VectorXd mu = eta.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    Eigen::VectorXd w = mu.cwiseProduct(Eigen::VectorXd::Ones(mu.size()) - mu).cwiseMax(1e-12);
    Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X + penalty;
    Eigen::VectorXd grad = X.transpose() * (y - mu) - penalty * fit.beta;
    Eigen::VectorXd step = info.ldlt().solve(grad);

    double scale = 1.0, next = obj;
    Eigen::VectorXd candidate = fit.beta;
    for (int halving = 0; halving < 30; ++halving) {
      candidate = fit.beta + scale * step;
      next = objective(candidate);
      if (next >= obj - 1e-12) break;
      scale *= 0.5;
    }
    if (next < obj) next = obj, candidate = fit.beta;
    fit.iterations = it + 1;
    double change = (candidate - fit.beta).cwiseAbs().maxCoeff();
    fit.beta = candidate;
    fit.objective_trace.push_back(next);
    bool flat = std::abs(next - obj) < tol * (1.0 + std::abs(obj));
    obj = next;
    if (change < tol || flat) {
      fit.converged = true;
      break;
    }
  }
  fit.log_likelihood = detail::logistic_loglik(X, y, fit.beta);
  return fit;
}

// Perfect or quasi-perfect separation: the unpenalised fit drives the
// likelihood to its supremum with diverging coefficients.
inline bool separation_suspected(const LogisticFit& fit, std::size_t n) {
  return fit.beta.cwiseAbs().maxCoeff() > 25.0 ||
         fit.log_likelihood > -1e-6 * static_cast<double>(n) || !fit.converged;
}

// -------------------------------------------------- resampling utilities

struct PermutationResult {
  double observed = 0.0;
  double p_greater = 1.0;
  double p_less = 1.0;
  std::size_t permutations = 0;
};

// Two-sample permutation test on the difference of means (a minus b).
inline PermutationResult two_sample_permutation_test(std::span<const double> a,
                                                     std::span<const double> b,
                                                     std::size_t permutations, Rng& rng) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t na = a.size();
  auto stat = [&](const std::vector<double>& v) {
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < v.size(); ++i) (i < na ? sa : sb) += v[i];
    return sa / static_cast<double>(na) - sb / static_cast<double>(v.size() - na);
  };
  PermutationResult r;
  r.observed = stat(pooled);
  r.permutations = permutations;
  // Relative tolerance so that permutations reproducing the observed split
  // up to rounding count as ties.
  double tol = 1e-12 * (1.0 + std::abs(r.observed));
  std::size_t ge = 0, le = 0;
  for (std::size_t k = 0; k < permutations; ++k) {
    std::shuffle(pooled.begin(), pooled.end(), rng);
    double s = stat(pooled);
    if (s >= r.observed - tol) ++ge;
    if (s <= r.observed + tol) ++le;
  }
  r.p_greater = static_cast<double>(ge + 1) / static_cast<double>(permutations + 1);
  r.p_less = static_cast<double>(le + 1) / static_cast<double>(permutations + 1);
  return r;
}

inline std::size_t cube_root_block(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9)));
}

// Indices for one moving-block bootstrap resample of length n.
inline std::vector<std::size_t> moving_block_indices(std::size_t n, std::size_t block, Rng& rng) {
  block = std::clamp<std::size_t>(block, 1, n);
  std::uniform_int_distribution<std::size_t> start(0, n - block);
  std::vector<std::size_t> idx;
  idx.reserve(n + block);
  while (idx.size() < n) {
    auto s = start(rng);
    for (std::size_t k = 0; k < block && idx.size() < n; ++k) idx.push_back(s + k);
  }
  return idx;
}

// Lag maximising the sample cross-correlation of leader[t + lag] with
// follower[t] over |lag| <= max_lag. The estimator is the usual one: global
// means, divisor n at every lag, so short overlaps are not favoured. A
// non-positive lag means the leader moves no later than the follower.
inline int lag_of_max_cross_correlation(std::span<const double> leader,
                                        std::span<const double> follower, int max_lag) {
  if (leader.size() != follower.size()) throw Error(ErrorKind::MisalignedSeries, "cross-correlation");
  const int n = static_cast<int>(leader.size());
  if (n == 0) return 0;
  const double ml = mean(leader), mf = mean(follower);
  double sl = 0.0, sf = 0.0;
  for (int t = 0; t < n; ++t) {
    sl += (leader[t] - ml) * (leader[t] - ml);
    sf += (follower[t] - mf) * (follower[t] - mf);
  }
  if (sl <= 0.0 || sf <= 0.0) return 0;
  int best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (int t = 0; t < n; ++t) {
      int s = t + lag;
      if (s >= 0 && s < n) c += (leader[s] - ml) * (follower[t] - mf);
    }
    c /= std::sqrt(sl * sf);
    // Prefer the lag closest to zero on ties.
    if (c > best + 1e-12 || (std::abs(c - best) <= 1e-12 && std::abs(lag) < std::abs(best_lag))) {
      best = c;
      best_lag = lag;
    }
  }
  return best_lag;
}

}  // namespace emergelab::stats
