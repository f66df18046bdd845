#pragma once

// The process observed at its successive line-level changes tau(n): a +-1
// walk on levels, a nearest-neighbour walk on T_p, and a pathwise sampler of
// the sojourn time tau with its exit side.

#include <cmath>
#include <cstdint>
#include <vector>

#include "treebolic/closed_forms.hpp"
#include "treebolic/errors.hpp"
#include "treebolic/rng.hpp"
#include "treebolic/tree.hpp"
#include "treebolic/vertical.hpp"

namespace treebolic {

struct SkeletonState {
  TreeVertex vertex;
  double clock = 0.0;  // tau(n)
  std::int64_t n = 0;
};

struct TauSample {
  double tau = 0.0;
  int side = 0;
};

inline constexpr std::int64_t kMaxTauSteps = 1'000'000'000;

// +1 with probability rho / (rho + 1).
inline int step_side(const ModelParams& m, RngStream& rng) {
  const double rho = m.rho();
  return rng.bernoulli(rho / (rho + 1.0)) ? 1 : -1;
}

inline TreeVertex step_vertex(const TreeVertex& v, int side, RngStream& rng) {
  if (side == -1) return v.predecessor();
  if (side != 1) throw DomainError("step_vertex: side must be +1 or -1");
  return v.successor(v.p() == 1 ? 0 : rng.uniform_int(v.p()));
}

// Time for Y, started at y0 in (-1, 1), to reach -1 or 1. Starting on the
// line 0 gives tau(1); an interior start gives the first line time.
inline TauSample sample_tau(const ModelParams& m, RngStream& rng, double dt, double y0 = 0.0) {
  if (!(y0 > -1.0 && y0 < 1.0)) throw DomainError("sample_tau: start must lie strictly between -1 and 1");
  const VerticalLaw law = VerticalLaw::from(m);
  const std::int64_t nsub = vertical_substeps(dt, law.sigma);
  const double h = dt / static_cast<double>(nsub);
  double y = y0, t = 0.0;
  for (std::int64_t i = 0; i < kMaxTauSteps; ++i) {
    const VerticalStep s = vertical_step(y, h, law, rng, rng.normal());
    if (s.hit && s.line != 0) return {t + s.frac * h, static_cast<int>(s.line)};
    y = s.y;
    t += h;
  }
  throw NumericalFailure("sample_tau: no exit after the step guard");
}

// States 0..n_steps: clock tau(k), vertex W_{tau(k)}.
inline std::vector<SkeletonState> run_skeleton(const ModelParams& m, std::int64_t n_steps, RngStream& rng, double dt,
                                               const TreeVertex& start) {
  if (n_steps < 1) throw DomainError("run_skeleton: n_steps must be >= 1");
  if (start.p() != m.p) throw DomainError("run_skeleton: start vertex lives in another tree");
  std::vector<SkeletonState> out;
  out.reserve(static_cast<std::size_t>(n_steps) + 1);
  out.push_back({start, 0.0, 0});
  for (std::int64_t k = 1; k <= n_steps; ++k) {
    const TauSample s = sample_tau(m, rng, dt);
    const SkeletonState& prev = out.back();
    out.push_back({step_vertex(prev.vertex, s.side, rng), prev.clock + s.tau, k});
  }
  return out;
}

inline std::vector<SkeletonState> run_skeleton(const ModelParams& m, std::int64_t n_steps, RngStream& rng,
                                               double dt) {
  return run_skeleton(m, n_steps, rng, dt, TreeVertex::root(m.p));
}

}  // namespace treebolic
