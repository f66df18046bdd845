#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "treebolic/treebolic_space.hpp"

using namespace treebolic;

namespace {

// Minimum over the line by a dense scan on a wide window, then local refinement.
double scan_through_line(const HPoint& a, const HPoint& b, double h) {
  auto f = [&](double x) { return hyp_distance(a, HPoint(x, h)) + hyp_distance(HPoint(x, h), b); };
  const double span = std::abs(a.x - b.x) + a.y + b.y + h;
  double lo = std::min(a.x, b.x) - span, hi = std::max(a.x, b.x) + span;
  double best_x = lo, best = f(lo);
  for (int round = 0; round < 6; ++round) {
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
      const double x = lo + (hi - lo) * i / n;
      const double v = f(x);
      if (v < best) best = v, best_x = x;
    }
    const double w = (hi - lo) / n;
    lo = best_x - 2 * w;
    hi = best_x + 2 * w;
  }
  return best;
}

HTPoint on_vertex(double x, const TreeVertex& v) { return HTPoint{x, TreePoint::at(v)}; }

}  // namespace

TEST(TreebolicSpace, Params) {
  EXPECT_THROW(HTParams(1.0, 2), DomainError);
  EXPECT_THROW(HTParams(2.0, 0), DomainError);
  HTParams hp(2.0, 2);
  EXPECT_DOUBLE_EQ(ht_origin(2).im(hp), 1.0);
}

TEST(TreebolicSpace, KnownDistances) {
  for (double q : {2.0, 3.0, std::exp(1.0)}) {
    HTParams hp(q, 2);
    const auto o = TreeVertex::root(2);
    const auto top = o.successor(1).successor(0);
    EXPECT_NEAR(ht_distance(hp, on_vertex(0, o), on_vertex(0, top)), 2 * std::log(q), 1e-12);
    const auto s = ht_distance(hp, on_vertex(0, o.successor(0)), on_vertex(0, o.successor(1)));
    EXPECT_NEAR(s, 2 * std::log(q), 1e-12);
    const auto sw = sandwich(hp, on_vertex(0, o.successor(0)), on_vertex(0, o.successor(1)));
    EXPECT_NEAR(sw.mid, 2 * std::log(q), 1e-12);
    EXPECT_EQ(ht_distance(hp, on_vertex(1.5, top), on_vertex(1.5, top)), 0.0);
  }
}

TEST(TreebolicSpace, CaseOneSandwichIsExact) {
  std::mt19937_64 g(41);
  HTParams hp(2.5, 3);
  for (int i = 0; i < 2000; ++i) {
    const auto a = fixtures::random_ht_point(g, 3);
    // b on the geodesic from a down to omega, or above a on a branch.
    std::uniform_real_distribution<double> dh(0.0, 3.0), dx(-4.0, 4.0);
    const HTPoint b{a.x + dx(g), TreePoint::below(a.w.upper(), a.hor() - dh(g))};
    const auto sw = sandwich(hp, a, b);
    ASSERT_NEAR(sw.mid, sw.lower, 1e-9);
  }
}

TEST(TreebolicSpace, DistanceMatchesScanOracle) {
  std::mt19937_64 g(42);
  for (std::int64_t p : {1, 2, 3}) {
    HTParams hp(p == 1 ? 2.0 : 1.7 + static_cast<double>(p) * 0.3, p);
    for (int i = 0; i < 400; ++i) {
      const auto a = fixtures::random_ht_point(g, p), b = fixtures::random_ht_point(g, p);
      const auto& va = a.w.upper();
      const auto& vb = b.w.upper();
      double oracle;
      if (is_ancestor_or_equal(va, vb) || is_ancestor_or_equal(vb, va)) {
        oracle = hyp_distance(a.projection(hp), b.projection(hp));
      } else {
        oracle = scan_through_line(a.projection(hp), b.projection(hp), std::pow(hp.q, confluent(va, vb).hor()));
      }
      ASSERT_NEAR(ht_distance(hp, a, b), oracle, 1e-7 * (1.0 + oracle));
    }
  }
}

// The line objective can have two dips (one near each abscissa); at most two
// local minima occur, and the minimiser must return the global one.
TEST(TreebolicSpace, LineObjectiveShapeAndGlobalMinimum) {
  std::mt19937_64 g(43);
  std::uniform_real_distribution<double> lx(-60.0, 60.0), ly(-3.0, 3.0);
  int bimodal = 0;
  for (int i = 0; i < 400; ++i) {
    const HPoint za(lx(g), std::exp(ly(g))), zb(lx(g), std::exp(ly(g)));
    const double h = std::min(za.y, zb.y) * std::exp(ly(g) - 3.0);
    const double lo = std::min(za.x, zb.x) - 10, hi = std::max(za.x, zb.x) + 10;
    const int n = 20000;
    std::vector<double> v(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double x = lo + (hi - lo) * k / n;
      v[k] = hyp_distance(za, HPoint(x, h)) + hyp_distance(HPoint(x, h), zb);
    }
    int minima = 0;
    for (int k = 1; k < n; ++k)
      if (v[k] < v[k - 1] && v[k] <= v[k + 1]) ++minima;
    ASSERT_LE(minima, 2);
    if (minima == 2) ++bimodal;
    const double got = detail::min_through_line(za, zb, h, kDefaultDistanceTol);
    ASSERT_LE(got, scan_through_line(za, zb, h) + 1e-9 * (1.0 + got));
  }
  EXPECT_GT(bimodal, 0);
}

TEST(TreebolicSpace, AsymmetricTwoDipCase) {
  for (double ya : {1.0, 1.5, 3.0})
    for (double yb : {1.0, 1.5, 3.0}) {
      const HPoint a(0.0, ya), b(100.0, yb);
      const double h = 0.01;
      EXPECT_NEAR(detail::min_through_line(a, b, h, 1e-12), scan_through_line(a, b, h), 1e-9);
    }
}

TEST(TreebolicSpace, MetricAxiomsAndSandwich) {
  std::mt19937_64 g(44);
  for (std::int64_t p : {1, 2, 3}) {
    HTParams hp(p == 3 ? 3.0 : 2.0, p);
    for (int i = 0; i < 20000; ++i) {
      const auto a = fixtures::random_ht_point(g, p), b = fixtures::random_ht_point(g, p),
                 c = fixtures::random_ht_point(g, p);
      const double ab = ht_distance(hp, a, b), ba = ht_distance(hp, b, a);
      ASSERT_NEAR(ab, ba, 1e-9);
      ASSERT_GE(ab, 0.0);
      ASSERT_LE(ht_distance(hp, a, c), ab + ht_distance(hp, b, c) + 1e-8);
      const auto sw = sandwich(hp, a, b);
      ASSERT_LE(sw.lower, sw.mid + 1e-9);
      ASSERT_LE(sw.mid, sw.upper + 1e-9);
      ASSERT_NEAR(sw.upper - sw.lower, 2.0 * kSandwichDelta, 1e-12);
    }
  }
}

TEST(TreebolicSpace, Densities) {
  HTParams hp(2.0, 2);
  EXPECT_DOUBLE_EQ(measure_density(hp, ht_origin(2), 1.3, 0.7), 1.0);
  const auto v = TreeVertex::root(2).successor(1);
  EXPECT_DOUBLE_EQ(measure_density(hp, HTPoint{0.3, TreePoint::at(v)}, 1.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(measure_density(hp, HTPoint{0.3, TreePoint(v, 0.4)}, 0.0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(tree_measure_density(TreePoint::at(TreeVertex::root(2)), 0.4, 3.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(tree_measure_density(TreePoint(v, 0.3), 1.0, 3.0, 5.0), 3.0);
  EXPECT_NEAR(tree_measure_density(TreePoint(v, 0.5), 2.0, 1.0, 2.0), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(measure_density(hp, ht_origin(2), 1.0, 0.0), DomainError);
}
