#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "treebolic/analysis.hpp"

using namespace treebolic;

namespace {

// Brute force sup |F1 - F2| evaluated just at and just after every pooled point.
double ks_brute(const std::vector<double>& a, const std::vector<double>& b) {
  auto ecdf = [](const std::vector<double>& s, double x) {
    double c = 0;
    for (double v : s) c += v <= x;
    return c / static_cast<double>(s.size());
  };
  double d = 0;
  for (const auto* s : {&a, &b})
    for (double x : *s) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  return d;
}

double skew_direct(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double m2 = 0, m3 = 0;
  for (double x : xs) {
    m2 += (x - m) * (x - m);
    m3 += (x - m) * (x - m) * (x - m);
  }
  m2 /= static_cast<double>(xs.size());
  m3 /= static_cast<double>(xs.size());
  return m3 / std::pow(m2, 1.5);
}

}  // namespace

TEST(Analysis, Summary) {
  const auto s = summarize({1, 2, 3, 4});
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.se, std::sqrt(5.0 / 12.0));
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 4);
}

TEST(Analysis, KsOneSample) {
  auto uni = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_DOUBLE_EQ(ks_one_sample({0.5}, uni).d, 0.5);
  EXPECT_DOUBLE_EQ(ks_one_sample({0.25, 0.75}, uni).d, 0.25);
  EXPECT_DOUBLE_EQ(ks_one_sample({0.9, 0.95}, uni).d, 0.9);
  EXPECT_THROW(ks_one_sample({}, uni), DomainError);
  std::mt19937_64 g(31);
  std::normal_distribution<double> nd;
  std::vector<double> xs(20000);
  for (auto& x : xs) x = nd(g);
  EXPECT_LT(ks_one_sample(xs, normal_cdf).d, 1.63 / std::sqrt(20000.0));
  for (auto& x : xs) x += 0.2;
  EXPECT_GT(ks_one_sample(xs, normal_cdf).d, 0.07);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
}

TEST(Analysis, KsTwoSampleAgreesWithBruteForceAndIsAPseudometric) {
  std::mt19937_64 g(32);
  std::uniform_int_distribution<int> small(0, 9);  // forces ties
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(1 + trial % 37), b(1 + trial % 23), c(5 + trial % 11);
    for (auto* s : {&a, &b, &c})
      for (auto& x : *s) x = trial % 2 ? small(g) : nd(g);
    const double dab = ks_two_sample(a, b).d;
    EXPECT_NEAR(dab, ks_brute(a, b), 1e-15);
    EXPECT_DOUBLE_EQ(dab, ks_two_sample(b, a).d);
    EXPECT_EQ(ks_two_sample(a, a).d, 0.0);
    EXPECT_LE(dab, ks_two_sample(a, c).d + ks_two_sample(c, b).d + 1e-15);
  }
}

TEST(Analysis, SkewnessJackknife) {
  std::mt19937_64 g(33);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> xs(300);
  for (auto& x : xs) x = ex(g);
  const Skewness s = skewness_jackknife(xs);
  EXPECT_NEAR(s.value, skew_direct(xs), 1e-9);
  std::vector<double> loo;
  double mean = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<double> ys = xs;
    ys.erase(ys.begin() + static_cast<long>(i));
    loo.push_back(skew_direct(ys));
    mean += loo.back();
  }
  mean /= static_cast<double>(xs.size());
  double acc = 0;
  for (double v : loo) acc += (v - mean) * (v - mean);
  EXPECT_NEAR(s.se, std::sqrt(acc * (xs.size() - 1.0) / xs.size()), 1e-8);

  std::vector<double> big(200000);
  for (auto& x : big) x = ex(g);
  const Skewness sb = skewness_jackknife(big);
  EXPECT_NEAR(sb.value, 2.0, 5 * sb.se);
  EXPECT_THROW(skewness_jackknife({1, 2}), DomainError);
}

TEST(Analysis, DriftFreeSamplerMoments) {
  // E max_{[0,1]} W = E |W_1| = sqrt(2/pi); grid of 1e4 steps underestimates the
  // maximum by about 0.006.
  const ModelParams m(2, 2, 1, 0.5);
  const auto draws = drift_free_limit_samples(m, 10000, 34, 10000);
  std::vector<double> hi, lo, end, val;
  for (const auto& d : draws) {
    hi.push_back(d.max);
    lo.push_back(-d.min);
    end.push_back(std::abs(d.end));
    val.push_back(d.value);
    ASSERT_GE(d.max, 0.0);
    ASSERT_LE(d.min, 0.0);
    ASSERT_NEAR(d.value, std::sqrt(2.0) * (2 * d.max - 2 * d.min - std::abs(d.end)), 1e-12);
  }
  const double target = std::sqrt(2.0 / M_PI);
  for (const auto* s : {&hi, &lo}) {
    const auto sum = summarize(*s);
    EXPECT_NEAR(sum.mean, target - 0.006, 4 * sum.se + 0.004);
  }
  const auto se = summarize(end);
  EXPECT_NEAR(se.mean, target, 4 * se.se);
  RngStream rng(34, 0);
  EXPECT_THROW(drift_free_limit_sample(m, rng, 10), DomainError);
}

TEST(Analysis, CltGuards) {
  EXPECT_THROW(distance_clt({1.0}, 1.0, ModelParams(2, 2, 1, 0.5)), DomainError);
  EXPECT_THROW(drift_free_clt({1.0}, 1.0, ModelParams(2, 2, 1, 1), {1.0}), DomainError);
  EXPECT_THROW(vertical_clt({1.0}, 0.0, ModelParams(2, 2, 1, 1)), DomainError);
}

TEST(Analysis, CltStandardisation) {
  // Synthetic Gaussian data with the target centre and scale standardise to N(0, 1).
  const ModelParams m(2, 2, 1, 1);
  const double t = 50.0;
  std::mt19937_64 g(35);
  std::normal_distribution<double> nd;
  std::vector<double> y(20000), d(20000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = nd(g);
    y[i] = t * escape_rate(m) / m.log_q() + std::sqrt(clt_sigma2(m) * t) * z;
    d[i] = m.log_q() * y[i];
  }
  const double crit = 1.63 / std::sqrt(20000.0);
  EXPECT_LT(vertical_clt(y, t, m).ks.d, crit);
  const CltResult dc = distance_clt(d, t, m);
  EXPECT_LT(dc.ks.d, crit);
  EXPECT_NEAR(dc.statistic.variance, 1.0, 0.05);
  // The literal sigma^2 misreads the scale by log q.
  EXPECT_GT(distance_clt(d, t, m, clt_sigma2(m)).ks.d, 0.05);
}

TEST(Analysis, DenseSolve) {
  std::mt19937_64 g(36);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 30;
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  std::vector<double> x(n), b(n, 0.0);
  for (int i = 0; i < n; ++i) {
    x[i] = u(g);
    for (int j = 0; j < n; ++j) a[i][j] = u(g) + (i == j ? 3.0 : 0.0);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b[i] += a[i][j] * x[j];
  const auto sol = solve_dense(a, b);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(sol[i], x[i], 1e-12);
  EXPECT_THROW(solve_dense({{0.0, 0.0}, {0.0, 0.0}}, {1.0, 1.0}), NumericalFailure);
}

TEST(Analysis, ConeOracleMatchesHarmonicMeasure) {
  // For the upward walk the end lands in cone(o) with probability
  // p (rho - 1)/(p rho - 1); a level-L cone inside receives 1/p^L of that.
  for (const ModelParams m : {ModelParams(2, 2, 1, 1), ModelParams(2, 3, 1, 1), ModelParams(2, 2, 0.5, 1)}) {
    const double rho = m.rho();
    const double p = static_cast<double>(m.p);
    const double base = p * (rho - 1.0) / (p * rho - 1.0);
    for (int level = 0; level <= 2; ++level) {
      const double oracle = cone_mass_oracle(m, level, 30, 30);
      EXPECT_NEAR(oracle, base / std::pow(p, level), 2e-4) << level;
      // Truncation converges: 12 and 10 differ by little.
      EXPECT_NEAR(cone_mass_oracle(m, level, 12, 12), cone_mass_oracle(m, level, 10, 10), 0.01);
    }
  }
  EXPECT_NEAR(cone_mass_oracle(ModelParams(2, 2, 1, 1), 1, 40, 40), 1.0 / 3.0, 1e-5);
  EXPECT_THROW(cone_mass_oracle(ModelParams(2, 2, 1, 1), -1), DomainError);
}

TEST(Analysis, ConeMassesCount) {
  const ModelParams m(2, 2, 1, 1);
  std::vector<PathState> finals(4);
  const TreeVertex o = TreeVertex::root(2);
  finals[0].strip = {o.successor(0).successor(1), -1};
  finals[1].strip = {o.successor(1), 0};
  finals[2].strip = {o.predecessor(), -1};
  finals[3].strip = {o.successor(0), 1};
  const auto cm = cone_masses(finals, m, 1, 1.0 / 3.0);
  ASSERT_EQ(cm.size(), 2u);
  EXPECT_EQ(cm[0].count + cm[1].count, 3);
  EXPECT_EQ(cm[0].cone, o.successor(0));
  EXPECT_EQ(cm[0].count, 2);
  EXPECT_DOUBLE_EQ(cm[1].empirical, 0.25);
}

TEST(Analysis, ZInfinitySeries) {
  const auto z = z_infinity_series({{0.5, 1.0}}, 3, 37, 0.25);
  for (double v : z) EXPECT_NEAR(v, 2.25, 1e-11);
  const auto w = z_infinity_series({{0.5, 1.0}, {0.5, -1.0}}, 2000, 37);
  EXPECT_NEAR(summarize(w).mean, 0.0, 4 * summarize(w).se);
  EXPECT_THROW(z_infinity_series({{1.0, 1.0}}, 1, 37), NumericalFailure);
  EXPECT_THROW(z_infinity_series({}, 1, 37), DomainError);
}

TEST(Analysis, ExitMeasureHistogram) {
  const ModelParams m(2, 2, 1, 1);
  const auto em = exit_measure_histogram(m, ht_origin(2), 600, 38, 2e-3, 0, -3.0, 3.0, 12);
  ASSERT_EQ(em.exits.size(), 600u);
  std::int64_t total = 0;
  for (const auto& l : em.lines) {
    total += l.count;
    EXPECT_EQ(tree_distance(l.line, TreeVertex::root(2)), 1);
    std::int64_t binned = 0;
    for (auto b : l.bins) binned += b;
    EXPECT_LE(binned, l.count);
  }
  EXPECT_EQ(total, 600);
  ASSERT_EQ(em.lines.size(), 3u);
  EXPECT_EQ(em.lines.front().line.level(), -1);
  EXPECT_EQ(em.count_for(TreeVertex::root(2).predecessor()), em.lines.front().count);
  const double down = em.lines.front().count / 600.0;
  EXPECT_NEAR(down, skeleton_probs(m).down_z, 0.07);
  const auto j = to_json(em);
  EXPECT_EQ(j["lines"].size(), 3u);
  const auto pool = exit_pool(em, m);
  for (std::size_t i = 0; i < pool.size(); ++i)
    EXPECT_DOUBLE_EQ(pool[i].first, em.exits[i].side == 1 ? 2.0 : 0.5);
}

TEST(Analysis, EscapeEstimateOnFixedStates) {
  const ModelParams m(2, 2, 1, 1);
  std::vector<PathState> finals(1);
  finals[0] = initial_state(HTPoint{0.0, TreePoint::at(TreeVertex::on_axis(2, 3))});
  const auto e = estimate_escape_rate(finals, m, 2.0);
  EXPECT_NEAR(e.distance_rate.mean, 3 * std::log(2.0) / 2.0, 1e-8);
  EXPECT_NEAR(e.tree_rate.mean, 3 * std::log(2.0) / 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(e.target, escape_rate(m));
}
