#pragma once

// Upper half-plane H = { x + iy : y > 0 } with the hyperbolic metric.

#include <algorithm>
#include <cmath>

#include "treebolic/errors.hpp"

namespace treebolic {

struct HPoint {
  double x = 0.0;
  double y = 1.0;

  HPoint() = default;
  HPoint(double x_, double y_) : x(x_), y(y_) {
    if (!(y > 0.0)) throw DomainError("HPoint: imaginary part must be positive");
  }
  friend bool operator==(const HPoint&, const HPoint&) = default;
};

inline double hyp_distance(const HPoint& a, const HPoint& b) {
  const double chord = std::hypot(a.x - b.x, a.y - b.y);
  return 2.0 * std::asinh(chord / (2.0 * std::sqrt(a.y * b.y)));
}

// Highest point of the geodesic through a and b.
inline HPoint apex(const HPoint& a, const HPoint& b) {
  constexpr double kVerticalTol = 1e-12;
  if (std::abs(a.x - b.x) < kVerticalTol) return a.y >= b.y ? a : b;
  const double c = ((a.x * a.x + a.y * a.y) - (b.x * b.x + b.y * b.y)) / (2.0 * (a.x - b.x));
  const double r = std::hypot(a.x - c, a.y);
  // The apex lies between the two abscissae only if the arc passes over the centre.
  const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
  if (c < lo || c > hi) return a.y >= b.y ? a : b;
  return HPoint(c, r);
}

// log_q(Im z).
inline double busemann(const HPoint& z, double q) {
  if (!(q > 1.0)) throw DomainError("busemann: q must exceed 1");
  return std::log(z.y) / std::log(q);
}

}  // namespace treebolic
