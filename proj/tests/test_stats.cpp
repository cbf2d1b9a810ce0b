#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "emergelab/rng.hpp"
#include "emergelab/stats.hpp"
#include "helpers.hpp"

using namespace emergelab;
using namespace emergelab::stats;

namespace {

std::int64_t sign_count(const std::vector<double>& x) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) s += x[j] > x[i] ? 1 : x[j] < x[i] ? -1 : 0;
  return s;
}

// P(S >= s) over all n! orderings of distinct values.
double exact_upper_tail(std::size_t n, std::int64_t s) {
  std::vector<double> p(n);
  std::iota(p.begin(), p.end(), 0.0);
  double hit = 0, total = 0;
  do {
    total += 1;
    if (sign_count(p) >= s) hit += 1;
  } while (std::next_permutation(p.begin(), p.end()));
  return hit / total;
}

}  // namespace

TEST(MannKendall, StatisticEqualsPairwiseSignsUpToTwelve) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> few(0, 3);
  std::normal_distribution<double> g;
  for (std::size_t n = 2; n <= 12; ++n)
    for (int rep = 0; rep < 60; ++rep) {
      std::vector<double> x(n);
      for (auto& v : x) v = rep % 2 ? static_cast<double>(few(rng)) : g(rng);
      EXPECT_EQ(mann_kendall(x).s, sign_count(x)) << "n=" << n;
    }
}

TEST(MannKendall, StrictlyIncreasingTen) {
  std::vector<double> x(10);
  std::iota(x.begin(), x.end(), 1.0);
  auto mk = mann_kendall(x);
  EXPECT_EQ(mk.s, 45);
  EXPECT_DOUBLE_EQ(mk.variance, 125.0);
  EXPECT_NEAR(mk.z, 44.0 / std::sqrt(125.0), 1e-12);
  EXPECT_NEAR(mk.z, 3.94, 0.005);
  EXPECT_LT(mk.p_increasing, 1e-4);
  EXPECT_TRUE(mk.exact);
}

TEST(MannKendall, ExactTailMatchesEnumeration) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (std::size_t n = 3; n <= 8; ++n)
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> x(n);
      for (auto& v : x) v = g(rng);
      auto mk = mann_kendall(x);
      EXPECT_NEAR(mk.p_increasing, exact_upper_tail(n, mk.s), 1e-12);
    }
}

TEST(MannKendall, ConstantSeriesHasNoTrend) {
  std::vector<double> flat(15, 2.0);
  auto mk = mann_kendall(flat);
  EXPECT_EQ(mk.s, 0);
  EXPECT_EQ(mk.p_increasing, 0.5);
  EXPECT_EQ(mk.p_decreasing, 0.5);
  std::vector<double> short_flat(6, 1.0);
  EXPECT_EQ(mann_kendall(short_flat).p_increasing, 1.0);  // every arrangement ties
}

TEST(MannKendall, TieCorrectedVariance) {
  std::vector<double> x = {1, 2, 2, 3, 3, 3, 4, 5, 6, 7, 8, 9};
  double n = 12;
  double expect = (n * (n - 1) * (2 * n + 5) - 2 * 1 * 9 - 3 * 2 * 11) / 18.0;
  EXPECT_NEAR(mann_kendall(x).variance, expect, 1e-12);
}

TEST(Ols, ExactLine) {
  std::vector<double> x, y;
  for (int i = -10; i <= 30; ++i) x.push_back(i * 0.37), y.push_back(2.0 * i * 0.37 + 1.0);
  auto f = ols(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.residual_ss, 0.0, 1e-20);
  EXPECT_EQ(testkit::kind_of([] {
              std::vector<double> c(5, 1.0);
              ols(c, c);
            }),
            ErrorKind::NoVariation);
}

namespace {

// zeta(s, q) by brute summation with an integral tail.
double zeta_oracle(double s, double q) {
  double sum = 0.0;
  const int K = 200000;
  for (int k = K - 1; k >= 0; --k) sum += std::pow(q + k, -s);
  return sum + std::pow(q + K, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(q + K, -s);
}

double continuous_sample(Rng& rng, double xmin, double alpha) {
  return xmin * std::pow(1.0 - uniform01(rng), -1.0 / (alpha - 1.0));
}

}  // namespace

TEST(PowerLaw, ClosedFormMleMatchesIndependentEvaluation) {
  Rng rng = substream(1, "test");
  std::vector<double> sample;
  for (int i = 0; i < 2000; ++i) sample.push_back(continuous_sample(rng, 1.0, 2.2));
  for (double xmin : {1.0, 2.0, 5.0}) {
    double sum = 0.0, m = 0.0;
    for (double x : sample)
      if (x >= xmin) sum += std::log(x) - std::log(xmin), m += 1;
    EXPECT_NEAR(continuous_powerlaw_alpha(sample, xmin), 1.0 + m / sum, 1e-12);
  }
}

TEST(PowerLaw, ClosedFormRecoversExponent) {
  Rng rng = substream(2025, "powerlaw");
  std::vector<double> sample(10000);
  for (auto& x : sample) x = continuous_sample(rng, 1.0, 2.5);
  double a = continuous_powerlaw_alpha(sample, 1.0);
  EXPECT_GE(a, 2.4);
  EXPECT_LE(a, 2.6);
}

TEST(PowerLaw, HurwitzZetaAgainstDirectSum) {
  for (double s : {1.5, 2.0, 2.5, 3.7})
    for (double q : {1.0, 2.0, 7.0, 40.0}) EXPECT_NEAR(hurwitz_zeta(s, q) / zeta_oracle(s, q), 1.0, 1e-9) << s << " " << q;
  EXPECT_NEAR(hurwitz_zeta(2.0, 1.0), M_PI * M_PI / 6.0, 1e-13);
}

TEST(PowerLaw, DiscreteSamplerFollowsTheLaw) {
  Rng rng = substream(3, "discrete");
  DiscretePowerLaw law(1, 2.5);
  std::vector<double> counts(4, 0.0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    auto x = law.sample(rng);
    if (x <= 4) counts[x - 1] += 1;
  }
  const double z = zeta_oracle(2.5, 1.0);
  for (int x = 1; x <= 4; ++x) {
    double p = std::pow(x, -2.5) / z;
    EXPECT_NEAR(counts[x - 1] / n, p, 4.0 * std::sqrt(p * (1 - p) / n)) << x;
  }
}

TEST(PowerLaw, DiscreteMleRecoversExponentAtUnitCutoff) {
  Rng rng = substream(2025, "powerlaw");
  std::vector<std::int64_t> sample(10000);
  for (auto& x : sample) x = sample_discrete_powerlaw(rng, 1, 2.5);
  double a = discrete_powerlaw_alpha(sample, 1);
  EXPECT_GE(a, 2.4);
  EXPECT_LE(a, 2.6);
  // It is the likelihood maximum.
  double sl = 0.0;
  for (auto x : sample) sl += std::log(static_cast<double>(x));
  auto ll = [&](double al) { return -al * sl - 10000.0 * std::log(zeta_oracle(al, 1.0)); };
  EXPECT_GE(ll(a), ll(a + 1e-3));
  EXPECT_GE(ll(a), ll(a - 1e-3));

  auto fit = fit_powerlaw(sample, std::nullopt, 50, 4);
  EXPECT_NEAR(fit.alpha, 2.5, 0.15);
  ASSERT_TRUE(fit.gof_p);
  EXPECT_GT(*fit.gof_p, 0.05);
}

TEST(PowerLaw, DegenerateSample) {
  std::vector<std::int64_t> ones(20, 1);
  EXPECT_EQ(testkit::kind_of([&] { discrete_powerlaw_alpha(ones, 1); }), ErrorKind::TooShort);
  EXPECT_EQ(testkit::kind_of([&] { discrete_powerlaw_alpha(ones, 0); }), ErrorKind::InvalidArgument);
}

namespace {

struct LogisticData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

LogisticData logistic_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LogisticData d{Eigen::MatrixXd(n, 3), Eigen::VectorXd(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double c = u(rng), e = u(rng);
    d.X(i, 0) = 1.0, d.X(i, 1) = c, d.X(i, 2) = e;
    d.y[i] = u(rng) < 1.0 / (1.0 + std::exp(-(-1.0 + 2.0 * c + 1.0 * e))) ? 1.0 : 0.0;
  }
  return d;
}

}  // namespace

TEST(LogisticIrls, ObjectiveNeverDecreases) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto d = logistic_data(300, seed);
    for (double ridge : {0.0, 1.0}) {
      auto f = logistic_irls(d.X, d.y, ridge);
      EXPECT_TRUE(f.converged);
      for (std::size_t k = 1; k < f.objective_trace.size(); ++k)
        EXPECT_GE(f.objective_trace[k], f.objective_trace[k - 1] - 1e-12);
    }
  }
}

TEST(LogisticIrls, ScoreVanishesAtOptimum) {
  auto d = logistic_data(500, 9);
  auto f = logistic_irls(d.X, d.y);
  Eigen::VectorXd mu = (d.X * f.beta).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  Eigen::VectorXd score = d.X.transpose() * (d.y - mu);
  EXPECT_LT(score.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LogisticIrls, RecoversCoefficientsWithinBootstrapIntervals) {
  const std::size_t n = 3000;
  auto d = logistic_data(n, 31);
  auto f = logistic_irls(d.X, d.y);
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::vector<double>> draws(3);
  Eigen::MatrixXd Xb(n, 3);
  Eigen::VectorXd yb(n);
  for (int b = 0; b < 300; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      auto k = pick(rng);
      Xb.row(i) = d.X.row(k);
      yb[i] = d.y[k];
    }
    auto fb = logistic_irls(Xb, yb);
    for (int j = 0; j < 3; ++j) draws[j].push_back(fb.beta[j]);
  }
  const double truth[] = {-1.0, 2.0, 1.0};
  for (int j = 0; j < 3; ++j) {
    EXPECT_LE(quantile(draws[j], 0.025), truth[j]) << j;
    EXPECT_GE(quantile(draws[j], 0.975), truth[j]) << j;
  }
  EXPECT_NEAR(f.beta[1], 2.0, 0.5);
}

TEST(LogisticIrls, SeparationIsDetected) {
  Eigen::MatrixXd X(40, 2);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) X(i, 0) = 1.0, X(i, 1) = i / 40.0, y[i] = i >= 20;
  EXPECT_TRUE(separation_suspected(logistic_irls(X, y), 40));
  auto ridge = logistic_irls(X, y, 1.0);
  EXPECT_TRUE(ridge.converged);
  EXPECT_GT(ridge.beta[1], 0.0);
}

TEST(Spearman, MonotoneAndIndependent) {
  std::vector<double> x(30), y(30);
  std::iota(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < 30; ++i) y[i] = std::exp(x[i] / 10.0);
  auto r = spearman(x, y);
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_EQ(r.p_greater, 0.0);
  std::reverse(y.begin(), y.end());
  EXPECT_GT(spearman(x, y).p_greater, 0.99);
}

TEST(ChiSquare, HandComputedTable) {
  // Margins 50/50 and 30/70 give expected counts 15 and 35 in every row.
  std::vector<std::vector<double>> t = {{20, 30}, {10, 40}};
  double e11 = 50.0 * 30 / 100, e12 = 50.0 * 70 / 100;
  double x2 = 2 * (20 - e11) * (20 - e11) / e11 + 2 * (30 - e12) * (30 - e12) / e12;
  auto r = chi_square_independence(t);
  EXPECT_NEAR(r.statistic, x2, 1e-12);
  EXPECT_EQ(r.dof, 1.0);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(x2 / 2.0)), 1e-10);
}

TEST(Permutation, DetectsShiftAndKeepsSizeUnderNull) {
  Rng rng = substream(4, "perm");
  std::normal_distribution<double> g;
  std::vector<double> a(12), b(12);
  for (auto& v : a) v = g(rng) + 2.0;
  for (auto& v : b) v = g(rng);
  EXPECT_LT(two_sample_permutation_test(a, b, 2000, rng).p_greater, 0.01);
  int rejections = 0;
  for (int rep = 0; rep < 200; ++rep) {
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    rejections += two_sample_permutation_test(a, b, 400, rng).p_greater < 0.05;
  }
  EXPECT_LE(rejections, 12);
}

TEST(CrossCorrelation, LeaderShowsNegativeLag) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::vector<double> lead(80), follow(80, 0.0);
  for (auto& v : lead) v = g(rng);
  for (std::size_t t = 3; t < 80; ++t) follow[t] = lead[t - 3];
  EXPECT_EQ(lag_of_max_cross_correlation(lead, follow, 10), -3);
  EXPECT_EQ(lag_of_max_cross_correlation(follow, lead, 10), 3);
  std::vector<double> flat(80, 1.0);
  EXPECT_EQ(lag_of_max_cross_correlation(flat, lead, 10), 0);
}

TEST(Blocks, CubeRootAndIndices) {
  EXPECT_EQ(cube_root_block(1000), 10u);
  EXPECT_EQ(cube_root_block(1001), 11u);
  EXPECT_EQ(cube_root_block(1), 1u);
  Rng rng = substream(1, "blocks");
  auto idx = moving_block_indices(50, 4, rng);
  EXPECT_EQ(idx.size(), 50u);
  for (auto i : idx) EXPECT_LT(i, 50u);
}

TEST(Substreams, NamedAndIndexedStreamsDiffer) {
  EXPECT_NE(substream_seed(1, "a"), substream_seed(1, "b"));
  EXPECT_NE(substream_seed(1, "a", 0), substream_seed(1, "a", 1));
  EXPECT_EQ(substream_seed(7, "x", 3), substream_seed(7, "x", 3));
}
