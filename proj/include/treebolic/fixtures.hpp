#pragma once

// Random geometric fixtures (unit tests and the acceptance runner).

#include <cmath>
#include <cstdint>
#include <random>

#include "treebolic/padic.hpp"
#include "treebolic/tree.hpp"
#include "treebolic/isometry.hpp"
#include "treebolic/treebolic_space.hpp"

namespace treebolic::fixtures {

inline PadicRational random_padic(std::mt19937_64& g, std::int64_t p, int max_denom = 4, std::int64_t span = 200) {
  std::uniform_int_distribution<std::int64_t> num(-span, span);
  std::uniform_int_distribution<int> den(0, max_denom);
  return PadicRational(p, BigInt(num(g)), den(g));
}

inline TreeVertex random_vertex(std::mt19937_64& g, std::int64_t p, int lo = -3, int hi = 4) {
  std::uniform_int_distribution<int> lvl(lo, hi);
  if (p == 1) return TreeVertex::on_axis(1, lvl(g));
  return TreeVertex(random_padic(g, p), lvl(g));
}

inline TreePoint random_tree_point(std::mt19937_64& g, std::int64_t p) {
  std::uniform_real_distribution<double> off(0.0, 1.0);
  double t = 1.0 - off(g);  // (0, 1]
  if (off(g) < 0.2) t = 1.0;
  return TreePoint(random_vertex(g, p), t);
}

inline HTPoint random_ht_point(std::mt19937_64& g, std::int64_t p, double xspan = 6.0) {
  std::uniform_real_distribution<double> x(-xspan, xspan);
  return HTPoint{x(g), random_tree_point(g, p)};
}

inline AfElement random_element(std::mt19937_64& g, double q, std::int64_t p) {
  std::uniform_int_distribution<int> n(-3, 3);
  std::uniform_real_distribution<double> b(-5.0, 5.0);
  const int k = n(g);
  return AfElement::make(q, p, k, b(g), p >= 2 ? random_padic(g, p, 3, 50) : PadicRational{});
}

inline HPoint random_h(std::mt19937_64& g) {
  std::uniform_real_distribution<double> x(-5.0, 5.0), ly(-3.0, 3.0);
  return HPoint(x(g), std::exp(ly(g)));
}

}  // namespace treebolic::fixtures
