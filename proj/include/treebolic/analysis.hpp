#pragma once

// Statistical verifiers: sample summaries, Kolmogorov-Smirnov statistics, the
// escape-rate and CLT estimators, the drift-free limit sampler, exit-measure
// histograms and the boundary oracles (cone masses for rho > 1, the Z_infinity
// series for rho < 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"

#include "treebolic/closed_forms.hpp"
#include "treebolic/errors.hpp"
#include "treebolic/parallel.hpp"
#include "treebolic/path_sim.hpp"
#include "treebolic/rng.hpp"
#include "treebolic/tree.hpp"
#include "treebolic/treebolic_space.hpp"

namespace treebolic {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline SampleSummary summarize(const std::vector<double>& xs) {
  SampleSummary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.variance = s.n > 1 ? ss / static_cast<double>(s.n - 1) : 0.0;
  s.se = std::sqrt(s.variance / static_cast<double>(s.n));
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

inline nlohmann::json to_json(const SampleSummary& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"variance", s.variance}, {"se", s.se}, {"min", s.min}, {"max", s.max}};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct KsResult {
  double d = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;  // 0 for a one-sample test
};

inline nlohmann::json to_json(const KsResult& k) { return {{"D", k.d}, {"n1", k.n1}, {"n2", k.n2}}; }

inline KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, xs.size(), 0};
}

// sup |F1 - F2| over the pooled support; ties advance both samples together.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, a.size(), b.size()};
}

// Sample skewness m3 / m2^1.5 and its jackknife standard error.
struct Skewness {
  double value = 0.0;
  double se = 0.0;
};

inline Skewness skewness_jackknife(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 3) throw DomainError("skewness: need at least 3 samples");
  const double c = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  double s1 = 0, s2 = 0, s3 = 0;
  for (double x : xs) {
    const double u = x - c;
    s1 += u;
    s2 += u * u;
    s3 += u * u * u;
  }
  auto skew = [](double k, double t1, double t2, double t3) {
    const double m = t1 / k;
    const double m2 = t2 / k - m * m;
    const double m3 = t3 / k - 3.0 * m * t2 / k + 2.0 * m * m * m;
    return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  };
  Skewness out;
  out.value = skew(static_cast<double>(n), s1, s2, s3);
  std::vector<double> loo(n);
  double mean_loo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = xs[i] - c;
    loo[i] = skew(static_cast<double>(n - 1), s1 - u, s2 - u * u, s3 - u * u * u);
    mean_loo += loo[i];
  }
  mean_loo /= static_cast<double>(n);
  double acc = 0.0;
  for (double g : loo) acc += (g - mean_loo) * (g - mean_loo);
  out.se = std::sqrt(acc * static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

// ---------------------------------------------------------------------------
// Rate of escape and CLTs. All path-based estimators assume paths started at
// the origin (i, o) with Y_0 = 0.

struct EscapeEstimate {
  SampleSummary distance_rate;  // d_HT(X_T, o) / T
  SampleSummary tree_rate;      // log q * d_T(W_T, o) / T
  double target = 0.0;          // |l|
};

inline EscapeEstimate estimate_escape_rate(const std::vector<PathState>& finals, const ModelParams& m,
                                           double horizon) {
  if (!(horizon > 0.0)) throw DomainError("estimate_escape_rate: horizon must be positive");
  std::vector<double> d(finals.size()), tr(finals.size());
  const TreePoint o = TreePoint::at(TreeVertex::root(m.p));
  for (std::size_t i = 0; i < finals.size(); ++i) {
    d[i] = distance_to_origin(finals[i], m) / horizon;
    tr[i] = m.log_q() * tree_distance(finals[i].tree_point(), o) / horizon;
  }
  return {summarize(d), summarize(tr), std::abs(escape_rate(m))};
}

struct CltResult {
  KsResult ks;
  SampleSummary statistic;  // the standardized values
};

inline nlohmann::json to_json(const CltResult& c) { return {{"ks", to_json(c.ks)}, {"statistic", to_json(c.statistic)}}; }

// (Y_t - Y_0 - t l / log q) / (sigma sqrt t) against N(0, 1); sigma^2 is the
// variance rate of Y in Busemann units.
inline CltResult vertical_clt(const std::vector<double>& y_t, double t, const ModelParams& m, double y0 = 0.0) {
  if (!(t > 0.0)) throw DomainError("vertical_clt: t must be positive");
  const double centre = t * escape_rate(m) / m.log_q();
  const double scale = std::sqrt(clt_sigma2(m) * t);
  std::vector<double> z(y_t.size());
  for (std::size_t i = 0; i < y_t.size(); ++i) z[i] = (y_t[i] - y0 - centre) / scale;
  return {ks_one_sample(z, normal_cdf), summarize(z)};
}

// (d_t - t |l|) / sqrt t against N(0, v). The distance is log q times the
// Busemann displacement to first order, so its variance rate is
// v = log^2 q * sigma^2; variance_rate overrides v when given.
inline CltResult distance_clt(const std::vector<double>& d_t, double t, const ModelParams& m,
                              std::optional<double> variance_rate = std::nullopt) {
  const double ell = escape_rate(m);
  if (ell == 0.0) throw DomainError("distance_clt: zero rate of escape; use drift_free_clt");
  if (!(t > 0.0)) throw DomainError("distance_clt: t must be positive");
  const double v = variance_rate ? *variance_rate : m.log_q() * m.log_q() * clt_sigma2(m);
  const double scale = std::sqrt(v * t);
  std::vector<double> z(d_t.size());
  for (std::size_t i = 0; i < d_t.size(); ++i) z[i] = (d_t[i] - t * std::abs(ell)) / scale;
  return {ks_one_sample(z, normal_cdf), summarize(z)};
}

struct DriftFreeDraw {
  double value = 0.0;  // (log q / sqrt E tau) (2 max - 2 min - |end|)
  double max = 0.0;
  double min = 0.0;
  double end = 0.0;
};

// Standard Brownian motion on [0, 1] on a grid of grid_n steps.
inline DriftFreeDraw drift_free_limit_sample(const ModelParams& m, RngStream& rng, std::int64_t grid_n) {
  if (grid_n < 1000) throw DomainError("drift_free_limit_sample: grid must have at least 1000 steps");
  const double step = 1.0 / std::sqrt(static_cast<double>(grid_n));
  double w = 0.0, hi = 0.0, lo = 0.0;
  for (std::int64_t k = 0; k < grid_n; ++k) {
    w += step * rng.normal();
    hi = std::max(hi, w);
    lo = std::min(lo, w);
  }
  const double scale = m.log_q() / std::sqrt(exp_tau(m));
  return {scale * (2.0 * hi - 2.0 * lo - std::abs(w)), hi, lo, w};
}

inline std::vector<DriftFreeDraw> drift_free_limit_samples(const ModelParams& m, std::size_t n, std::uint64_t seed,
                                                           std::int64_t grid_n, std::uint64_t first_stream = 0) {
  return parallel_map(n, [&](std::size_t i) {
    RngStream rng(seed, first_stream + i);
    return drift_free_limit_sample(m, rng, grid_n);
  });
}

// Two-sample KS between d_t / sqrt t and limit-law draws.
inline KsResult drift_free_clt(const std::vector<double>& d_t, double t, const ModelParams& m,
                               const std::vector<double>& limit) {
  if (classify_regime(m) != Regime::Critical) throw DomainError("drift_free_clt: requires rho = 1");
  if (!(t > 0.0)) throw DomainError("drift_free_clt: t must be positive");
  std::vector<double> z(d_t.size());
  for (std::size_t i = 0; i < d_t.size(); ++i) z[i] = d_t[i] / std::sqrt(t);
  return ks_two_sample(z, limit);
}

// ---------------------------------------------------------------------------
// Exit measures.

struct LineHistogram {
  TreeVertex line;
  std::int64_t count = 0;
  std::vector<std::int64_t> bins;  // crossing abscissae; values outside the window are only counted
};

struct ExitMeasure {
  std::vector<FirstExit> exits;
  std::vector<LineHistogram> lines;  // sorted by level, then centre
  double x_lo = -5.0;
  double x_hi = 5.0;
  int nbins = 20;

  std::int64_t count_for(const TreeVertex& v) const {
    for (const auto& l : lines)
      if (l.line == v) return l.count;
    return 0;
  }
};

inline ExitMeasure exit_measure_histogram(const ModelParams& m, const HTPoint& start, std::size_t n_samples,
                                          std::uint64_t seed, double dt, std::uint64_t first_stream = 0,
                                          double x_lo = -5.0, double x_hi = 5.0, int nbins = 20) {
  if (!(x_hi > x_lo) || nbins < 1) throw DomainError("exit_measure_histogram: bad window");
  ExitMeasure out;
  out.x_lo = x_lo;
  out.x_hi = x_hi;
  out.nbins = nbins;
  out.exits = parallel_map(n_samples, [&](std::size_t i) {
    RngStream rng(seed, first_stream + i);
    return first_exit(m, dt, start, rng);
  });
  for (const FirstExit& e : out.exits) {
    auto it = std::find_if(out.lines.begin(), out.lines.end(), [&](const LineHistogram& l) { return l.line == e.vertex; });
    if (it == out.lines.end()) {
      out.lines.push_back({e.vertex, 0, std::vector<std::int64_t>(static_cast<std::size_t>(nbins), 0)});
      it = out.lines.end() - 1;
    }
    ++it->count;
    if (e.x >= x_lo && e.x < x_hi) {
      const auto b = static_cast<std::size_t>((e.x - x_lo) / (x_hi - x_lo) * nbins);
      ++it->bins[std::min(b, static_cast<std::size_t>(nbins - 1))];
    }
  }
  std::sort(out.lines.begin(), out.lines.end(), [](const LineHistogram& a, const LineHistogram& b) {
    if (a.line.level() != b.line.level()) return a.line.level() < b.line.level();
    if (a.line.p() == 1) return false;
    return a.line.center().to_double() < b.line.center().to_double();
  });
  return out;
}

inline nlohmann::json to_json(const ExitMeasure& em) {
  nlohmann::json lines = nlohmann::json::array();
  const double n = static_cast<double>(em.exits.size());
  for (const auto& l : em.lines)
    lines.push_back({{"line", l.line.to_string()},
                     {"level", l.line.level()},
                     {"count", l.count},
                     {"mass", static_cast<double>(l.count) / n},
                     {"bins", l.bins}});
  return {{"samples", em.exits.size()}, {"xLo", em.x_lo}, {"xHi", em.x_hi}, {"nbins", em.nbins}, {"lines", lines}};
}

// ---------------------------------------------------------------------------
// Dense linear solve with partial pivoting (small systems only).

inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) throw NumericalFailure("solve_dense: singular system");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return x;
}

// Probability that the tree walk (down 1/(1+rho), each child rho/((1+rho)p))
// started at o ends in the cone of a fixed vertex v at level `level` inside
// cone(o). The walk is lumped by symmetry into: spine vertices below o (depth
// 1..depth, reflecting at the bottom), the geodesic o = v_0, ..., v_level,
// heights 1..height inside cone(v) (height = success), and heights 1..height
// in side cones hanging off spine or geodesic vertices (height = failure).
inline double cone_mass_oracle(const ModelParams& m, int level, int depth = 12, int height = 12) {
  if (level < 0 || depth < 1 || height < 1) throw DomainError("cone_mass_oracle: bad truncation");
  const double rho = m.rho();
  const double p = static_cast<double>(m.p);
  const double down = 1.0 / (1.0 + rho);
  const double child = rho / ((1.0 + rho) * p);

  // Index layout.
  const int n_spine = depth;          // S_1..S_depth
  const int n_geo = level + 1;        // P_0..P_level
  const int n_cone = height - 1;      // C_1..C_{height-1}; C_height absorbing
  const int n_anchor = n_spine + n_geo;
  const int n_side = n_anchor * (height - 1);  // O(anchor, 1..height-1)
  const int n = n_spine + n_geo + n_cone + n_side;
  auto S = [&](int d) { return d - 1; };
  auto P = [&](int k) { return n_spine + k; };
  auto C = [&](int h) { return n_spine + n_geo + h - 1; };
  auto O = [&](int anchor, int h) { return n_spine + n_geo + n_cone + anchor * (height - 1) + h - 1; };
  // anchors: spine S_d -> d - 1, geodesic P_k -> n_spine + k

  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);
  for (int i = 0; i < n; ++i) a[i][i] = 1.0;
  // f(i) - sum P(i,j) f(j) = sum P(i, success)
  auto add = [&](int from, int to, double w) { a[from][to] -= w; };
  auto add_side_entry = [&](int from, int anchor, double w) {
    if (height > 1) add(from, O(anchor, 1), w);
    // height == 1: side cone entry is already failure (contributes 0)
  };
  for (int d = 1; d <= depth; ++d) {
    const int i = S(d);
    add(i, d == depth ? S(d) : S(d + 1), down);
    add(i, d == 1 ? P(0) : S(d - 1), child);
    if (m.p > 1) add_side_entry(i, d - 1, child * (p - 1.0));
  }
  for (int k = 0; k <= level; ++k) {
    const int i = P(k);
    add(i, k == 0 ? S(1) : P(k - 1), down);
    if (k < level) {
      add(i, P(k + 1), child);
      if (m.p > 1) add_side_entry(i, n_spine + k, child * (p - 1.0));
    } else if (height > 1) {
      add(i, C(1), child * p);
    } else {
      rhs[i] += child * p;
    }
  }
  for (int h = 1; h < height; ++h) {
    const int i = C(h);
    add(i, h == 1 ? P(level) : C(h - 1), down);
    if (h + 1 == height) rhs[i] += child * p;
    else add(i, C(h + 1), child * p);
  }
  for (int anchor = 0; anchor < n_anchor; ++anchor) {
    const int base = anchor < n_spine ? S(anchor + 1) : P(anchor - n_spine);
    for (int h = 1; h < height; ++h) {
      const int i = O(anchor, h);
      add(i, h == 1 ? base : O(anchor, h - 1), down);
      if (h + 1 < height) add(i, O(anchor, h + 1), child * p);
    }
  }
  return solve_dense(std::move(a), std::move(rhs))[P(0)];
}

struct ConeMass {
  TreeVertex cone;
  std::int64_t count = 0;
  double empirical = 0.0;
  double oracle = 0.0;
  double se = 0.0;  // binomial, at the oracle mass
};

// Masses of W_T over the level-`level` cones inside cone(o).
inline std::vector<ConeMass> cone_masses(const std::vector<PathState>& finals, const ModelParams& m, int level,
                                         double oracle) {
  std::vector<TreeVertex> cones{TreeVertex::root(m.p)};
  for (int l = 0; l < level; ++l) {
    std::vector<TreeVertex> next;
    for (const auto& v : cones)
      for (const auto& w : v.successors()) next.push_back(w);
    cones = std::move(next);
  }
  const double n = static_cast<double>(finals.size());
  std::vector<ConeMass> out;
  for (const auto& c : cones) {
    ConeMass cm{c, 0, 0.0, oracle, std::sqrt(oracle * (1.0 - oracle) / n)};
    for (const auto& s : finals)
      if (is_ancestor_or_equal(c, s.strip_vertex())) ++cm.count;
    cm.empirical = static_cast<double>(cm.count) / n;
    out.push_back(cm);
  }
  return out;
}

// Z_infinity = x0 + sum_k A_1 ... A_{k-1} B_k with (A_k, B_k) drawn i.i.d. from
// a pool of first-exit pairs (q^side, exit abscissa) of a start on a line.
inline std::vector<double> z_infinity_series(const std::vector<std::pair<double, double>>& pool, std::size_t n,
                                             std::uint64_t seed, double x0 = 0.0, double cutoff = 1e-12,
                                             std::uint64_t first_stream = 0) {
  if (pool.empty()) throw DomainError("z_infinity_series: empty pool");
  return parallel_map(n, [&](std::size_t i) {
    RngStream rng(seed, first_stream + i);
    double z = x0, prod = 1.0;
    for (int k = 0; k < 1'000'000 && prod > cutoff; ++k) {
      const auto& [a, b] = pool[static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(pool.size())))];
      z += prod * b;
      prod *= a;
    }
    if (prod > cutoff) throw NumericalFailure("z_infinity_series: product did not contract (rho >= 1?)");
    return z;
  });
}

inline std::vector<std::pair<double, double>> exit_pool(const ExitMeasure& em, const ModelParams& m) {
  std::vector<std::pair<double, double>> pool;
  pool.reserve(em.exits.size());
  for (const auto& e : em.exits) pool.emplace_back(std::pow(m.q, e.side), e.x);
  return pool;
}

}  // namespace treebolic
