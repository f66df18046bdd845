#pragma once

// Treebolic space HT(q, p): pairs (z, w) in H x T_p with hor(w) = log_q Im z.
// Points are stored non-redundantly as (Re z, w); Im z is q^hor(w).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "treebolic/errors.hpp"
#include "treebolic/hyperbolic.hpp"
#include "treebolic/tree.hpp"

namespace treebolic {

struct HTParams {
  double q = 2.0;
  std::int64_t p = 2;

  HTParams() = default;
  HTParams(double q_, std::int64_t p_) : q(q_), p(p_) {
    if (!(q > 1.0)) throw DomainError("HTParams: q must exceed 1");
    if (p < 1) throw DomainError("HTParams: p must be >= 1");
  }
  double log_q() const { return std::log(q); }
};

struct HTPoint {
  double x = 0.0;
  TreePoint w;

  double hor() const { return w.hor(); }
  double im(const HTParams& params) const { return std::pow(params.q, w.hor()); }
  HPoint projection(const HTParams& params) const { return HPoint(x, im(params)); }

  friend bool operator==(const HTPoint&, const HTPoint&) = default;
};

// The origin (i, o).
inline HTPoint ht_origin(std::int64_t p) { return HTPoint{0.0, TreePoint::at(TreeVertex::root(p))}; }

inline constexpr double kDefaultDistanceTol = 1e-10;

namespace detail {

// Golden-section search for a local minimum of f on [lo, hi].
template <class F>
double golden_min(const F& f, double lo, double hi, double tol) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  double best = std::min(f1, f2);
  for (int it = 0; it < 600 && hi - lo > tol; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
      best = std::min(best, f1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
      best = std::min(best, f2);
    }
    if (!(x1 > lo) && !(x2 < hi)) break;  // interval below floating resolution
  }
  return best;
}

// Minimum of d(a, (x, h)) + d((x, h), b) over the line Im = h. Each term is
// monotone away from its own abscissa, so minimisers lie between a.x and b.x.
// The sum is not unimodal in general (far-apart endpoints above a low line give
// one dip near each abscissa), so local minima are bracketed on a grid that is
// geometric towards both ends and each bracket is refined.
inline double min_through_line(const HPoint& a, const HPoint& b, double h, double tol) {
  auto f = [&](double x) { return hyp_distance(a, HPoint(x, h)) + hyp_distance(HPoint(x, h), b); };
  const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
  const double width = hi - lo;
  const double abs_tol = tol * h;
  if (width <= abs_tol) return f(0.5 * (lo + hi));

  std::vector<double> xs{lo, hi, 0.5 * (lo + hi)};
  for (double off = 1e-4 * std::min({h, a.y, b.y}); off < width; off *= 2.0) {
    xs.push_back(lo + off);
    xs.push_back(hi - off);
  }
  for (int k = 1; k < 16; ++k) xs.push_back(lo + width * k / 16.0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [&](double u, double v) { return v - u <= abs_tol; }), xs.end());
  std::vector<double> fs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);

  double best = *std::min_element(fs.begin(), fs.end());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const bool left_ok = i == 0 || fs[i] <= fs[i - 1];
    const bool right_ok = i + 1 == xs.size() || fs[i] <= fs[i + 1];
    if (!left_ok || !right_ok) continue;
    const double l = i == 0 ? xs[i] : xs[i - 1];
    const double r = i + 1 == xs.size() ? xs[i] : xs[i + 1];
    if (r - l > abs_tol) best = std::min(best, golden_min(f, l, r, abs_tol));
  }
  return best;
}

}  // namespace detail

// Case 1: one point lies on the geodesic from the other to omega, so both live
// in a common copy of H. Otherwise geodesics pass through the bifurcation line
// of the confluent vertex.
inline double ht_distance(const HTParams& params, const HTPoint& a, const HTPoint& b,
                          double tol = kDefaultDistanceTol) {
  if (!(tol > 0.0)) throw DomainError("ht_distance: tol must be positive");
  const HPoint za = a.projection(params), zb = b.projection(params);
  const TreeVertex& va = a.w.upper();
  const TreeVertex& vb = b.w.upper();
  if (va == vb || is_ancestor_or_equal(va, vb) || is_ancestor_or_equal(vb, va)) return hyp_distance(za, zb);
  const TreeVertex c = confluent(va, vb);
  const double h = std::pow(params.q, c.hor());
  return detail::min_through_line(za, zb, h, tol);
}

struct Sandwich {
  double mid = 0.0;    // d_H(z1,z2) + log q * d_T(w1,w2) - |log Im z1 - log Im z2|
  double lower = 0.0;  // d_HT
  double upper = 0.0;  // d_HT + 2 log(1 + sqrt 2)
};

inline const double kSandwichDelta = std::log(1.0 + std::sqrt(2.0));

inline double sandwich_mid(const HTParams& params, const HTPoint& a, const HTPoint& b) {
  const double lq = params.log_q();
  return hyp_distance(a.projection(params), b.projection(params)) + lq * tree_distance(a.w, b.w) -
         lq * std::abs(a.hor() - b.hor());
}

inline Sandwich sandwich(const HTParams& params, const HTPoint& a, const HTPoint& b,
                         double tol = kDefaultDistanceTol) {
  const double d = ht_distance(params, a, b, tol);
  return Sandwich{sandwich_mid(params, a, b), d, d + 2.0 * kSandwichDelta};
}

// Density of m_{alpha,beta} w.r.t. the area element: beta^hor(v) y^alpha on S_v \ L_{v^-}.
inline double measure_density(const HTParams& params, const HTPoint& z, double alpha, double beta) {
  if (!(beta > 0.0)) throw DomainError("measure_density: beta must be positive");
  return std::pow(beta, z.w.upper().hor()) * std::pow(z.im(params), alpha);
}

// Tree analogue: beta^hor(v) q^((alpha-1) hor(w)) for w in (v^-, v].
inline double tree_measure_density(const TreePoint& w, double alpha, double beta, double q) {
  if (!(beta > 0.0)) throw DomainError("tree_measure_density: beta must be positive");
  if (!(q > 1.0)) throw DomainError("tree_measure_density: q must exceed 1");
  return std::pow(beta, w.upper().hor()) * std::pow(q, (alpha - 1.0) * w.hor());
}

}  // namespace treebolic
