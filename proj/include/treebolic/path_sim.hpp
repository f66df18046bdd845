#pragma once

// Euler-Maruyama simulation of Brownian motion on HT(q, p). Inside a strip S_v
// the horizontal coordinate follows dx = sqrt2 q^Y dW1 and the vertical one
// (in Busemann units) dY = (1 - alpha)/log q dt + sqrt2/log q dW2. At a line
// the vertical part is skew-reflected (see vertical.hpp); an upward excursion
// enters one of the p strips above, uniformly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "treebolic/closed_forms.hpp"
#include "treebolic/errors.hpp"
#include "treebolic/parallel.hpp"
#include "treebolic/rng.hpp"
#include "treebolic/skeleton.hpp"
#include "treebolic/tree.hpp"
#include "treebolic/treebolic_space.hpp"
#include "treebolic/vertical.hpp"

namespace treebolic {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::int64_t record_stride = 1;
  std::uint64_t seed = 1;
  double distance_tol = kDefaultDistanceTol;
  bool record_distance = true;
  bool mirror = false;  // negate the horizontal noise (reflection-paired runs)

  void validate() const {
    if (!(dt > 0.0)) throw DomainError("SimConfig: dt must be positive");
    if (dt > 1e-2) throw DomainError("SimConfig: dt must not exceed 1e-2");
    if (!(horizon >= dt)) throw DomainError("SimConfig: horizon must be at least dt");
    if (record_stride < 1) throw DomainError("SimConfig: record stride must be >= 1");
  }
};

// Strip S_v, held as (base, child): v = base when child < 0, otherwise the
// child-th successor of base. Upward moves only pick an index; the ball
// arithmetic for v happens when it is actually needed.
struct StripRef {
  TreeVertex base;
  std::int64_t child = -1;

  TreeVertex top() const { return child < 0 ? base : base.successor(child); }
  std::int64_t top_level() const { return child < 0 ? base.level() : base.level() + 1; }
};

struct PathState {
  StripRef strip;
  double x = 0.0;
  double y = 0.0;  // Busemann coordinate, in [top_level - 1, top_level]
  double t = 0.0;
  std::int64_t n = 0;                        // skeleton counter n_t
  std::optional<std::int64_t> last_level;  // level of the last counted line visit

  TreeVertex strip_vertex() const { return strip.top(); }
  bool at_line() const { return y == std::nearbyint(y); }

  // W_t: the tree point at height y on the edge below the strip's top vertex.
  TreePoint tree_point() const {
    const TreeVertex v = strip.top();
    const double offset = y - (static_cast<double>(v.level()) - 1.0);
    if (offset <= 0.0) return TreePoint::at(v.predecessor());
    return TreePoint(v, std::min(offset, 1.0));
  }
  HTPoint point() const { return HTPoint{x, tree_point()}; }
};

// Start at an HT point: on a line (vertex) the state sits at the top of the
// strip below it and the line counts as tau(0); an edge-interior start has no
// counted line yet.
inline PathState initial_state(const HTPoint& start) {
  PathState s;
  s.strip = StripRef{start.w.upper(), -1};
  s.x = start.x;
  s.y = start.w.hor();
  if (start.w.is_vertex()) s.last_level = start.w.upper().level();
  return s;
}

namespace detail {

// Vertex carried by the line at `level`, which must bound the current strip.
inline TreeVertex line_vertex(const StripRef& strip, std::int64_t level) {
  const std::int64_t top = strip.top_level();
  if (level == top) return strip.top();
  if (level == top - 1) return strip.child >= 0 ? strip.base : strip.base.predecessor();
  throw NumericalFailure("path step left its strip by more than one level; dt too large");
}

inline void micro_step(PathState& s, const ModelParams& m, const VerticalLaw& law, double h, bool mirror,
                       RngStream& rng, std::vector<SkeletonState>* events) {
  const double xi1 = rng.normal();
  const double xi2 = rng.normal();
  const double scale = std::exp(s.y * m.log_q());
  s.x += (mirror ? -1.0 : 1.0) * std::sqrt(2.0 * h) * scale * xi1;
  const VerticalStep v = vertical_step(s.y, h, law, rng, xi2);
  if (v.hit) {
    const TreeVertex line = line_vertex(s.strip, v.line);
    if (!s.last_level || *s.last_level != v.line) {
      ++s.n;
      s.last_level = v.line;
      if (events) events->push_back({line, s.t + v.frac * h, s.n});
    }
    if (v.side < 0) {
      s.strip = StripRef{line, -1};
    } else {
      s.strip = StripRef{line, m.p == 1 ? 0 : rng.uniform_int(m.p)};
    }
  }
  s.y = v.y;
  s.t += h;
}

}  // namespace detail

// One step of length config.dt (split into micro-steps when the vertical
// increment would otherwise be too coarse). Line visits with a level change
// are appended to `events` when given.
inline PathState step_euler(const PathState& state, const ModelParams& m, const SimConfig& config, RngStream& rng,
                            std::vector<SkeletonState>* events = nullptr) {
  const VerticalLaw law = VerticalLaw::from(m);
  const std::int64_t nsub = vertical_substeps(config.dt, law.sigma);
  const double h = config.dt / static_cast<double>(nsub);
  PathState s = state;
  for (std::int64_t i = 0; i < nsub; ++i) detail::micro_step(s, m, law, h, config.mirror, rng, events);
  return s;
}

inline double distance_to_origin(const PathState& s, const ModelParams& m, double tol = kDefaultDistanceTol) {
  return ht_distance(HTParams(m.q, m.p), s.point(), ht_origin(m.p), tol);
}

struct TrajectoryRecord {
  std::uint64_t path = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::string vertex;
  std::int64_t n = 0;
  std::optional<double> dist;
};

inline TrajectoryRecord make_record(std::uint64_t path, const PathState& s, const ModelParams& m,
                                    const SimConfig& config) {
  TrajectoryRecord r{path, s.t, s.x, s.y, s.strip_vertex().to_string(), s.n, std::nullopt};
  if (config.record_distance) r.dist = distance_to_origin(s, m, config.distance_tol);
  return r;
}

struct PathResult {
  PathState final_state;
  std::vector<TrajectoryRecord> records;
  std::vector<SkeletonState> events;
};

// Runs to the horizon. `on_record` sees the start, every record_stride-th
// step and the final state.
inline PathState simulate_path(const ModelParams& m, const SimConfig& config, const HTPoint& start, RngStream& rng,
                               const std::function<void(const PathState&)>& on_record,
                               std::vector<SkeletonState>* events = nullptr) {
  config.validate();
  if (start.w.upper().p() != m.p) throw DomainError("simulate_path: start lives in another tree");
  const VerticalLaw law = VerticalLaw::from(m);
  const std::int64_t nsub = vertical_substeps(config.dt, law.sigma);
  const double h = config.dt / static_cast<double>(nsub);
  const auto steps = static_cast<std::int64_t>(std::llround(config.horizon / config.dt));
  PathState s = initial_state(start);
  if (on_record) on_record(s);
  for (std::int64_t k = 1; k <= steps; ++k) {
    for (std::int64_t i = 0; i < nsub; ++i) detail::micro_step(s, m, law, h, config.mirror, rng, events);
    s.t = static_cast<double>(k) * config.dt;  // no drift from summing h
    if (on_record && (k % config.record_stride == 0 || k == steps)) on_record(s);
  }
  return s;
}

inline PathResult simulate_path(const ModelParams& m, const SimConfig& config, const HTPoint& start, RngStream& rng,
                                std::uint64_t path_id = 0) {
  PathResult out;
  out.final_state = simulate_path(
      m, config, start, rng, [&](const PathState& s) { out.records.push_back(make_record(path_id, s, m, config)); },
      &out.events);
  return out;
}

// State at the first counted line visit (tau(1) from a line start, sigma from
// an edge-interior start), together with the line that was reached.
struct FirstExit {
  double time = 0.0;
  double x = 0.0;
  std::int64_t level = 0;
  TreeVertex vertex;  // vertex of the line reached
  int side = 0;       // level change relative to the start line (0 for interior starts)
};

inline constexpr std::int64_t kMaxExitSteps = 1'000'000'000;

inline FirstExit first_exit(const ModelParams& m, double dt, const HTPoint& start, RngStream& rng,
                            bool mirror = false) {
  const VerticalLaw law = VerticalLaw::from(m);
  const std::int64_t nsub = vertical_substeps(dt, law.sigma);
  const double h = dt / static_cast<double>(nsub);
  PathState s = initial_state(start);
  const std::optional<std::int64_t> level0 = s.last_level;
  std::vector<SkeletonState> events;
  for (std::int64_t i = 0; i < kMaxExitSteps; ++i) {
    const double x_before = s.x;
    detail::micro_step(s, m, law, h, mirror, rng, &events);
    if (!events.empty()) {
      const SkeletonState& e = events.front();
      const int side = level0 ? static_cast<int>(e.vertex.level() - *level0) : 0;
      // The horizontal increment is already taken at the pre-step height; the
      // crossing abscissa is interpolated at the same fraction as the clock.
      const double frac = (e.clock - (s.t - h)) / h;
      return {e.clock, x_before + frac * (s.x - x_before), e.vertex.level(), e.vertex, side};
    }
  }
  throw NumericalFailure("first_exit: no line visit after the step guard");
}

// Final states of n_paths independent paths; path i uses stream first_stream + i.
inline std::vector<PathState> run_paths(const ModelParams& m, const SimConfig& config, const HTPoint& start,
                                        std::size_t n_paths, std::uint64_t first_stream = 0) {
  config.validate();
  return parallel_map(n_paths, [&](std::size_t i) {
    RngStream rng(config.seed, first_stream + i);
    return simulate_path(m, config, start, rng, nullptr);
  });
}

// ---------------------------------------------------------------------------
// Serialisation. CSV columns: path,t,x,Y,vertex,n_t,dist (dist empty when not
// recorded). JSONL: one object per record with the same keys.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* kCsvHeader = "path,t,x,Y,vertex,n_t,dist";

inline void write_csv_row(std::ostream& os, const TrajectoryRecord& r) {
  os << r.path << ',' << format_double(r.t) << ',' << format_double(r.x) << ',' << format_double(r.y) << ",\""
     << r.vertex << "\"," << r.n << ',';
  if (r.dist) os << format_double(*r.dist);
  os << '\n';
}

inline nlohmann::json to_json(const TrajectoryRecord& r) {
  nlohmann::json j = {{"path", r.path}, {"t", r.t}, {"x", r.x}, {"Y", r.y}, {"vertex", r.vertex}, {"n_t", r.n}};
  j["dist"] = r.dist ? nlohmann::json(*r.dist) : nlohmann::json(nullptr);
  return j;
}

inline void write_jsonl_row(std::ostream& os, const TrajectoryRecord& r) { os << to_json(r).dump() << '\n'; }

}  // namespace treebolic
