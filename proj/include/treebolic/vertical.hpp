#pragma once

// One time step of the vertical coordinate Y (Busemann units) of the process:
// drifted Brownian motion between the integer levels, skew reflection at each
// level with upward probability gamma = beta p / (beta p + 1).
//
// Line visits inside a step are detected by a sign change of the endpoint or,
// failing that, by the Brownian-bridge crossing probability
// exp(-2 u0 u1 / (sigma^2 h)). Without the bridge test the scheme misses
// excursions that touch a line and return, which biases both the line clocks
// and the side frequencies by O(sqrt h).

#include <cmath>
#include <cstdint>

#include "treebolic/closed_forms.hpp"
#include "treebolic/errors.hpp"
#include "treebolic/rng.hpp"

namespace treebolic {

struct VerticalLaw {
  double mu = 0.0;     // drift (1 - alpha) / log q
  double sigma = 1.0;  // diffusion sqrt(2) / log q
  double gamma = 0.5;  // upward probability at a line

  static VerticalLaw from(const ModelParams& m) { return {m.vertical_drift(), m.vertical_sigma(), m.skew_up()}; }
};

struct VerticalStep {
  double y = 0.0;
  bool hit = false;
  std::int64_t line = 0;  // level visited when hit
  double frac = 0.0;      // fraction of the step elapsed at the visit
  int side = 0;           // excursion side chosen at the visit
};

// Largest increment sd allowed per micro-step; keeps the far line out of reach.
inline constexpr double kMaxStepSd = 0.07;
inline constexpr double kSnapTol = 1e-12;

inline std::int64_t vertical_substeps(double dt, double sigma) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double ratio = sigma * std::sqrt(dt) / kMaxStepSd;
  return ratio <= 1.0 ? 1 : static_cast<std::int64_t>(std::ceil(ratio * ratio));
}

// xi is the standard normal driving the step (drawn by the caller so that
// paired runs can share it).
inline VerticalStep vertical_step(double y, double h, const VerticalLaw& law, RngStream& rng, double xi) {
  const double k = std::nearbyint(y);
  const double u0 = y - k;
  const double dw = law.sigma * std::sqrt(h) * xi;
  if (std::abs(dw) >= 0.5) throw NumericalFailure("vertical step spans more than half a level; dt too large");
  const double ud = u0 + dw;
  const double uf = ud + law.mu * h;

  bool hit = u0 == 0.0 || ud * u0 <= 0.0 || uf * u0 <= 0.0;
  if (!hit) {
    const double e = 2.0 * u0 * ud / (law.sigma * law.sigma * h);
    hit = e < 40.0 && rng.uniform() < std::exp(-e);
  }
  VerticalStep out;
  if (!hit) {
    out.y = k + uf;
    return out;
  }
  out.hit = true;
  out.line = static_cast<std::int64_t>(k);
  out.frac = u0 == 0.0 ? 0.0 : std::abs(u0) / (std::abs(u0) + std::abs(ud));
  out.side = rng.bernoulli(law.gamma) ? 1 : -1;
  double u = out.side * std::abs(ud) + law.mu * h;
  if (u * out.side <= 0.0 || std::abs(u) < kSnapTol) u = 0.0;
  out.y = k + u;
  return out;
}

}  // namespace treebolic
