#pragma once

// The eleven acceptance criteria as one runner, shared by the acceptance test
// binary and `treebolic verify`. Each criterion reports PASS/FAIL against a
// pinned tolerance plus non-gating diagnostics. Seeds derive from one master
// seed fixed in AcceptanceOptions; nothing is tuned to the outcome.
//
// Quick mode shrinks every sample and uses dt = 1e-3. KS gates in quick mode
// are max(pinned, 99% critical value at the reduced sizes), since the pinned
// values are calibrated for the full sizes; 3-SE bands scale by themselves.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "treebolic/analysis.hpp"
#include "treebolic/closed_forms.hpp"
#include "treebolic/fixtures.hpp"
#include "treebolic/hyperbolic.hpp"
#include "treebolic/isometry.hpp"
#include "treebolic/padic.hpp"
#include "treebolic/parallel.hpp"
#include "treebolic/path_sim.hpp"
#include "treebolic/skeleton.hpp"
#include "treebolic/tree.hpp"
#include "treebolic/treebolic_space.hpp"

namespace treebolic {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;
  nlohmann::json details = nlohmann::json::object();
  double seconds = 0.0;
};

inline nlohmann::json to_json(const CriterionResult& r) {
  return {{"id", r.id},           {"title", r.title},     {"pass", r.pass},
          {"summary", r.summary}, {"details", r.details}, {"seconds", r.seconds}};
}

inline std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << (r.id < 10 ? " " : "") << r.id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.title
     << " | " << r.summary;
  return os.str();
}

inline constexpr std::uint64_t kDefaultAcceptanceSeed = 20240611;

struct AcceptanceOptions {
  bool quick = false;
  std::uint64_t seed = kDefaultAcceptanceSeed;
  std::vector<int> only;  // empty runs all
  std::function<void(const CriterionResult&)> on_result;
};

namespace acceptance_detail {

struct Sizes {
  double dt;
  std::size_t tau_n;        // skeleton tau draws per parameter set
  std::size_t exit_n;       // path first exits (criterion 3)
  std::size_t paths;        // CLT ensembles
  std::size_t escape_paths; // rate-of-escape subset
  std::size_t limit_n;      // drift-free limit draws
  std::int64_t grid_n;
  std::size_t exits;        // exit-measure samples per start
  std::size_t oracle_n;     // Z_infinity draws
  std::size_t geo_pairs;
  std::size_t group_n;
};

inline Sizes sizes(bool quick) {
  if (quick) return {1e-3, 10000, 2000, 300, 200, 2000, 1000, 2000, 4000, 10000, 2000};
  return {1e-4, 100000, 10000, 2000, 200, 10000, 10000, 10000, 20000, 100000, 10000};
}

// 99% two-sample (m = 0: one-sample) KS critical value.
inline double ks_critical(std::size_t n, std::size_t m = 0) {
  const double dn = static_cast<double>(n);
  if (m == 0) return 1.63 / std::sqrt(dn);
  const double dm = static_cast<double>(m);
  return 1.63 * std::sqrt((dn + dm) / (dn * dm));
}

struct EnsemblePath {
  std::vector<PathState> checkpoints;  // t = 0, T/4, T/2, 3T/4, T
  std::int64_t sign_changes = 0;       // sign flips of the visited line level
};

struct Ensemble {
  ModelParams m;
  double horizon = 0.0;
  std::vector<EnsemblePath> paths;

  std::vector<PathState> at(std::size_t k) const {
    std::vector<PathState> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.checkpoints.at(k));
    return out;
  }
};

// The horizon is rounded up to a multiple of 4 dt so that the quarter
// checkpoints fall on steps.
inline Ensemble run_ensemble(const ModelParams& m, double dt, double horizon, std::size_t n, std::uint64_t seed) {
  const auto quarter = static_cast<std::int64_t>(std::ceil(horizon / (4.0 * dt) - 1e-9));
  SimConfig c;
  c.dt = dt;
  c.horizon = 4.0 * static_cast<double>(quarter) * dt;
  c.record_stride = quarter;
  c.record_distance = false;
  c.seed = seed;
  Ensemble e{m, c.horizon, {}};
  e.paths = parallel_map(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    EnsemblePath out;
    std::vector<SkeletonState> events;
    simulate_path(m, c, ht_origin(m.p), rng, [&](const PathState& s) { out.checkpoints.push_back(s); }, &events);
    int last = 0;
    for (const auto& ev : events) {
      const std::int64_t l = ev.vertex.level();
      const int sgn = l > 0 ? 1 : (l < 0 ? -1 : 0);
      if (sgn != 0) {
        if (last != 0 && sgn != last) ++out.sign_changes;
        last = sgn;
      }
    }
    if (out.checkpoints.size() != 5) throw NumericalFailure("ensemble: checkpoint bookkeeping");
    return out;
  });
  return e;
}

inline double binom_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string fmt(double v, int prec = 5) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

class Runner {
 public:
  explicit Runner(const AcceptanceOptions& o) : opt_(o), sz_(sizes(o.quick)) {}

  CriterionResult run(int id) {
    CriterionResult r;
    r.id = id;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (id) {
        case 1: c1(r); break;
        case 2: c2(r); break;
        case 3: c3(r); break;
        case 4: c4(r); break;
        case 5: c5(r); break;
        case 6: c6(r); break;
        case 7: c7(r); break;
        case 8: c8(r); break;
        case 9: c9(r); break;
        case 10: c10(r); break;
        case 11: c11(r); break;
        default: throw DomainError("acceptance: unknown criterion " + std::to_string(id));
      }
    } catch (const DomainError&) {
      throw;
    } catch (const std::exception& e) {
      r.pass = false;
      r.summary = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.details["seconds"] = r.seconds;
    return r;
  }

 private:
  AcceptanceOptions opt_;
  Sizes sz_;
  std::map<int, std::vector<TauSample>> tau_cache_;
  std::optional<Ensemble> drifted_, driftfree_;

  std::uint64_t seed(int criterion, int k = 0) const { return opt_.seed + 1000u * criterion + k; }
  double ks_gate(double pinned, std::size_t n, std::size_t m = 0) const {
    return opt_.quick ? std::max(pinned, ks_critical(n, m)) : pinned;
  }

  static ModelParams drifted_params() { return ModelParams(2, 2, 1, 1); }
  static ModelParams driftfree_params() { return ModelParams(2, 2, 1, 0.5); }

  const std::vector<TauSample>& taus(int which) {
    auto it = tau_cache_.find(which);
    if (it != tau_cache_.end()) return it->second;
    const ModelParams m = which == 0 ? ModelParams(2, 2, 1, 0.5) : ModelParams(2, 2, 0.5, 1);
    const std::uint64_t s = seed(2, which);
    auto v = parallel_map(sz_.tau_n, [&](std::size_t i) {
      RngStream rng(s, i);
      return sample_tau(m, rng, sz_.dt);
    });
    return tau_cache_.emplace(which, std::move(v)).first->second;
  }

  const Ensemble& drifted() {
    if (!drifted_) {
      const ModelParams m = drifted_params();
      drifted_ = run_ensemble(m, sz_.dt, 200.0 * exp_tau(m), sz_.paths, seed(4));
    }
    return *drifted_;
  }
  const Ensemble& driftfree() {
    if (!driftfree_) {
      const ModelParams m = driftfree_params();
      driftfree_ = run_ensemble(m, sz_.dt, 200.0 * exp_tau(m), sz_.paths, seed(5));
    }
    return *driftfree_;
  }

  // 1. Closed-form consistency over the parameter grid.
  void c1(CriterionResult& r) {
    r.title = "closed-form consistency";
    double worst = 0.0, worst_lt = 0.0;
    int cases = 0;
    for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0})
      for (double q : {2.0, std::exp(1.0)})
        for (std::int64_t p : {1, 2, 3})
          for (double beta : {0.2, 1.0 / static_cast<double>(p), 1.0}) {
            const ModelParams m(q, p, alpha, beta);
            const double a = exp_tau(m), b = exp_tau_from_transform(m);
            worst = std::max(worst, std::abs(a - b) / std::abs(b));
            worst_lt = std::max(worst_lt, std::abs(laplace_tau(m, 0.0) - 1.0));
            ++cases;
          }
    r.pass = worst <= 1e-10 && worst_lt <= 1e-12;
    r.summary = std::to_string(cases) + " cases, max rel |Etau - r'(0)e^b/(rho+1)| = " + fmt(worst, 3) +
                " (<= 1e-10), max |L(0) - 1| = " + fmt(worst_lt, 3) + " (<= 1e-12)";
    r.details = {{"cases", cases}, {"maxRelExpTau", worst}, {"maxLaplaceZero", worst_lt}};
  }

  // 2. Skeleton sampler against the closed forms.
  void c2(CriterionResult& r) {
    r.title = "skeleton sampler vs closed forms";
    bool ok = true;
    std::ostringstream sum;
    const double target_alpha1 = std::log(2.0) * std::log(2.0) / 2.0;
    const bool anchor = std::abs(exp_tau(ModelParams(2, 2, 1, 0.5)) - target_alpha1) < 1e-15 &&
                        std::abs(target_alpha1 - 0.24023) < 5e-6;
    ok = ok && anchor;
    r.details["anchorAlpha1"] = anchor;
    for (int which : {0, 1}) {
      const ModelParams m = which == 0 ? ModelParams(2, 2, 1, 0.5) : ModelParams(2, 2, 0.5, 1);
      const auto& v = taus(which);
      std::vector<double> t(v.size());
      double up = 0.0, lt = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        t[i] = v[i].tau;
        up += v[i].side == 1;
        lt += std::exp(-v[i].tau);
      }
      const double n = static_cast<double>(v.size());
      const SampleSummary s = summarize(t);
      const double et = exp_tau(m);
      const double pu = m.rho() / (m.rho() + 1.0);
      const double l1 = laplace_tau(m, 1.0);
      const bool mean_ok = std::abs(s.mean - et) <= std::max(4.0 * s.se, 0.02 * et);
      const bool up_ok = std::abs(up / n - pu) <= 3.0 * binom_se(pu, n);
      const bool lt_ok = std::abs(lt / n - l1) <= 0.01 * l1;
      ok = ok && mean_ok && up_ok && lt_ok;
      sum << (which ? "; " : "") << "alpha=" << m.alpha << ",beta=" << m.beta << ": Etau " << fmt(s.mean) << " vs "
          << fmt(et) << ", P(up) " << fmt(up / n, 4) << " vs " << fmt(pu, 4) << ", E e^-tau " << fmt(lt / n)
          << " vs " << fmt(l1);
      r.details[which ? "alpha0.5_beta1" : "alpha1_beta0.5"] = {
          {"n", v.size()},          {"meanTau", s.mean},  {"seTau", s.se},       {"expTau", et},
          {"probUp", up / n},       {"probUpTarget", pu}, {"laplace1", lt / n}, {"laplace1Target", l1},
          {"meanOk", mean_ok},      {"upOk", up_ok},      {"laplaceOk", lt_ok}};
    }
    r.pass = ok;
    r.summary = sum.str();
  }

  // 3. Path first exits against the skeleton sampler.
  void c3(CriterionResult& r) {
    r.title = "path first exits vs skeleton";
    const ModelParams m(2, 2, 1, 0.5);
    const auto& ref = taus(0);
    const std::uint64_t s = seed(3);
    const auto exits = parallel_map(sz_.exit_n, [&](std::size_t i) {
      RngStream rng(s, i);
      return first_exit(m, sz_.dt, ht_origin(2), rng);
    });
    std::vector<double> a, b;
    double up_a = 0, up_b = 0;
    for (const auto& e : exits) {
      a.push_back(e.time);
      up_a += e.side == 1;
    }
    for (const auto& t : ref) {
      b.push_back(t.tau);
      up_b += t.side == 1;
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const KsResult ks = ks_two_sample(a, b);
    const double gate = ks_gate(0.02, a.size(), b.size());
    const double pa = up_a / na, pb = up_b / nb;
    const double pool = (up_a + up_b) / (na + nb);
    const double se = std::sqrt(pool * (1 - pool) * (1 / na + 1 / nb));
    r.pass = ks.d < gate && std::abs(pa - pb) <= 3.0 * se;
    r.summary = "KS(tau(1)) = " + fmt(ks.d, 4) + " (< " + fmt(gate, 3) + "), P(up) path " + fmt(pa, 4) +
                " vs skeleton " + fmt(pb, 4) + " (3 SE = " + fmt(3 * se, 3) + ")";
    r.details = {{"ks", to_json(ks)}, {"gate", gate}, {"probUpPath", pa}, {"probUpSkeleton", pb}, {"se", se}};
  }

  // 4. Rate of escape, (2,2,1,1).
  void c4(CriterionResult& r) {
    r.title = "rate of escape";
    const Ensemble& e = drifted();
    const ModelParams& m = e.m;
    const auto finals = e.at(4);
    const std::size_t n = std::min(sz_.escape_paths, finals.size());
    const std::vector<PathState> subset(finals.begin(), finals.begin() + static_cast<long>(n));
    const EscapeEstimate est = estimate_escape_rate(subset, m, e.horizon);
    const double ell = std::abs(escape_rate(m));
    const double rel_d = est.distance_rate.mean / ell - 1.0;
    const double rel_t = est.tree_rate.mean / ell - 1.0;
    r.pass = std::abs(rel_d) <= 0.05 && std::abs(rel_t) <= 0.05;
    // Non-gating: all paths, and the increment between T/2 and T (free of the
    // O(1) distance offset at the end point).
    const EscapeEstimate all = estimate_escape_rate(finals, m, e.horizon);
    const auto halves = e.at(2);
    std::vector<double> inc(finals.size());
    for (std::size_t i = 0; i < finals.size(); ++i)
      inc[i] = (distance_to_origin(finals[i], m) - distance_to_origin(halves[i], m)) / (e.horizon / 2.0);
    const SampleSummary incs = summarize(inc);
    r.summary = std::to_string(n) + " paths, T = " + fmt(e.horizon) + ": d/T " + fmt(est.distance_rate.mean) +
                " (" + fmt(100 * rel_d, 3) + "%), log q d_T/T " + fmt(est.tree_rate.mean) + " (" +
                fmt(100 * rel_t, 3) + "%) vs |l| = " + fmt(ell) + " (5%); diag: increment rate " + fmt(incs.mean) +
                " +- " + fmt(incs.se, 2);
    r.details = {{"paths", n},
                 {"horizon", e.horizon},
                 {"ell", ell},
                 {"distanceRate", to_json(est.distance_rate)},
                 {"treeRate", to_json(est.tree_rate)},
                 {"relDistance", rel_d},
                 {"relTree", rel_t},
                 {"diagnostic",
                  {{"allPathsDistanceRate", to_json(all.distance_rate)},
                   {"allPathsTreeRate", to_json(all.tree_rate)},
                   {"incrementRate", to_json(incs)}}}};
  }

  // 5. Vertical CLT, drifted and drift-free.
  void c5(CriterionResult& r) {
    r.title = "vertical CLT";
    bool ok = true;
    std::ostringstream sum;
    for (const Ensemble* e : {&drifted(), &driftfree()}) {
      std::vector<double> y;
      for (const auto& s : e->at(4)) y.push_back(s.y);
      const CltResult c = vertical_clt(y, e->horizon, e->m);
      const double gate = ks_gate(0.05, y.size());
      ok = ok && c.ks.d < gate;
      const std::string key = e == &*drifted_ ? "drifted" : "driftFree";
      sum << (key == "drifted" ? "" : "; ") << key << " (rho=" << e->m.rho() << ") KS " << fmt(c.ks.d, 4) << " (< "
          << fmt(gate, 3) << "), mean " << fmt(c.statistic.mean, 3) << " var " << fmt(c.statistic.variance, 4);
      r.details[key] = {{"clt", to_json(c)}, {"gate", gate}, {"sigma2", clt_sigma2(e->m)}, {"horizon", e->horizon}};
    }
    r.pass = ok;
    r.summary = sum.str();
  }

  // 6. Distance CLT with drift.
  void c6(CriterionResult& r) {
    r.title = "distance CLT with drift";
    const Ensemble& e = drifted();
    std::vector<double> d;
    for (const auto& s : e.at(4)) d.push_back(distance_to_origin(s, e.m));
    const CltResult c = distance_clt(d, e.horizon, e.m);
    const double gate = ks_gate(0.07, d.size());
    r.pass = c.ks.d < gate;
    // Non-gating: the same statistic re-centred at its sample mean, and the
    // KS against the variance read literally in Busemann units.
    std::vector<double> z = d;
    const double scale = std::sqrt(e.m.log_q() * e.m.log_q() * clt_sigma2(e.m) * e.horizon);
    const double mean_d = summarize(d).mean;
    for (double& v : z) v = (v - mean_d) / scale;
    const KsResult centred = ks_one_sample(z, normal_cdf);
    const CltResult literal = distance_clt(d, e.horizon, e.m, clt_sigma2(e.m));
    r.summary = "KS " + fmt(c.ks.d, 4) + " (< " + fmt(gate, 3) + "), statistic mean " +
                fmt(c.statistic.mean, 3) + " +- " + fmt(c.statistic.se, 2) + " var " +
                fmt(c.statistic.variance, 4) + "; diag: re-centred KS " + fmt(centred.d, 4) + ", literal-sigma2 KS " +
                fmt(literal.ks.d, 4);
    r.details = {{"clt", to_json(c)},
                 {"gate", gate},
                 {"varianceRate", e.m.log_q() * e.m.log_q() * clt_sigma2(e.m)},
                 {"diagnostic", {{"recentredKs", to_json(centred)}, {"literalSigma2", to_json(literal)}}}};
  }

  // 7. Drift-free CLT against the limit sampler.
  void c7(CriterionResult& r) {
    r.title = "drift-free CLT";
    const Ensemble& e = driftfree();
    std::vector<double> d;
    for (const auto& s : e.at(4)) d.push_back(distance_to_origin(s, e.m));
    const auto draws = drift_free_limit_samples(e.m, sz_.limit_n, seed(7), sz_.grid_n);
    std::vector<double> lim, hi;
    for (const auto& x : draws) {
      lim.push_back(x.value);
      hi.push_back(x.max);
    }
    const KsResult ks = drift_free_clt(d, e.horizon, e.m, lim);
    const double gate = ks_gate(0.07, d.size(), lim.size());
    const SampleSummary mh = summarize(hi);
    const double target = std::sqrt(2.0 / M_PI);
    const bool sampler_ok = std::abs(mh.mean - target) <= 3.0 * mh.se;
    r.pass = ks.d < gate && sampler_ok;
    // Non-gating: the O(1) distance offset, sqrt(t) (E limit - E d/sqrt t),
    // and the KS once the path sample is shifted onto the limit mean.
    std::vector<double> z(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) z[i] = d[i] / std::sqrt(e.horizon);
    const double shift = summarize(lim).mean - summarize(z).mean;
    for (double& v : z) v += shift;
    const KsResult shifted = ks_two_sample(z, lim);
    r.summary = "KS " + fmt(ks.d, 4) + " (< " + fmt(gate, 3) + "); sampler E[max] " + fmt(mh.mean) + " vs " +
                fmt(target) + " (3 SE = " + fmt(3 * mh.se, 3) + "); diag: offset sqrt(t)*shift " +
                fmt(shift * std::sqrt(e.horizon), 3) + ", mean-shifted KS " + fmt(shifted.d, 4);
    r.details = {{"ks", to_json(ks)},
                 {"gate", gate},
                 {"scale", e.m.log_q() / std::sqrt(exp_tau(e.m))},
                 {"samplerMax", to_json(mh)},
                 {"gridN", sz_.grid_n},
                 {"pathDistance", to_json(summarize(d))},
                 {"limit", to_json(summarize(lim))},
                 {"diagnostic", {{"offset", shift * std::sqrt(e.horizon)}, {"shiftedKs", to_json(shifted)}}}};
  }

  // 8. Geometry suite.
  void c8(CriterionResult& r) {
    r.title = "geometry suite";
    std::mt19937_64 g(seed(8));
    std::int64_t sandwich_bad = 0, conf_bad = 0, bfs_bad = 0, bfs_pairs = 0;
    double split_err = 0.0;
    for (std::size_t i = 0; i < sz_.geo_pairs; ++i) {
      const std::int64_t p = 1 + static_cast<std::int64_t>(i % 3);
      const HTParams hp(p == 3 ? 3.0 : 2.0, p);
      const auto a = fixtures::random_ht_point(g, p), b = fixtures::random_ht_point(g, p);
      const Sandwich sw = sandwich(hp, a, b);
      if (!(sw.lower <= sw.mid + 1e-9 && sw.mid <= sw.upper + 1e-9)) ++sandwich_bad;
      const HPoint u = fixtures::random_h(g), v = fixtures::random_h(g);
      const HPoint c = apex(u, v);
      const double d = hyp_distance(u, v);
      if (std::abs(d - (2.0 * std::log(c.y) - std::log(u.y) - std::log(v.y))) > std::log(4.0) + 1e-12) ++conf_bad;
      split_err = std::max(split_err, std::abs(d - hyp_distance(u, c) - hyp_distance(c, v)));
    }
    for (std::int64_t p : {2, 3}) {
      // Breadth-first search on the depth-6 cone below a low vertex.
      std::vector<TreeVertex> vs{TreeVertex::on_axis(p, -3)};
      std::vector<std::vector<int>> adj(1);
      std::vector<int> frontier{0};
      for (int depth = 0; depth < 6; ++depth) {
        std::vector<int> next;
        for (int id : frontier)
          for (std::int64_t j = 0; j < p; ++j) {
            const int child = static_cast<int>(vs.size());
            vs.push_back(vs[id].successor(j));
            adj.emplace_back();
            adj[id].push_back(child);
            adj[child].push_back(id);
            next.push_back(child);
          }
        frontier = std::move(next);
      }
      for (std::size_t s = 0; s < vs.size(); ++s) {
        std::vector<int> dist(vs.size(), -1);
        std::queue<int> q;
        dist[s] = 0;
        q.push(static_cast<int>(s));
        while (!q.empty()) {
          const int x = q.front();
          q.pop();
          for (int y : adj[x])
            if (dist[y] < 0) {
              dist[y] = dist[x] + 1;
              q.push(y);
            }
        }
        for (std::size_t t = 0; t < vs.size(); ++t, ++bfs_pairs)
          if (tree_distance(vs[s], vs[t]) != dist[t]) ++bfs_bad;
      }
    }
    r.pass = sandwich_bad == 0 && conf_bad == 0 && bfs_bad == 0 && split_err <= 1e-9;
    r.summary = std::to_string(sz_.geo_pairs) + " pairs: sandwich violations " + std::to_string(sandwich_bad) +
                ", ln4 violations " + std::to_string(conf_bad) + ", max split error " + fmt(split_err, 3) +
                " (<= 1e-9); BFS mismatches " + std::to_string(bfs_bad) + "/" + std::to_string(bfs_pairs);
    r.details = {{"pairs", sz_.geo_pairs},        {"sandwichViolations", sandwich_bad},
                 {"confluentViolations", conf_bad}, {"maxSplitError", split_err},
                 {"bfsPairs", bfs_pairs},            {"bfsMismatches", bfs_bad}};
  }

  // 9. Group suite.
  void c9(CriterionResult& r) {
    r.title = "group suite";
    std::mt19937_64 g(seed(9));
    double iso_err = 0.0;
    std::int64_t modular_bad = 0, bs_bad = 0, ultra_bad = 0;
    for (std::size_t i = 0; i < sz_.group_n; ++i) {
      const std::int64_t p = 2 + static_cast<std::int64_t>(i % 2);
      const double q = static_cast<double>(p);
      const HTParams hp(q, p);
      const auto a = fixtures::random_element(g, q, p), b = fixtures::random_element(g, q, p);
      const auto z1 = fixtures::random_ht_point(g, p), z2 = fixtures::random_ht_point(g, p);
      const double d = ht_distance(hp, z1, z2);
      iso_err = std::max(iso_err, std::abs(ht_distance(hp, act(a, z1), act(a, z2)) - d) / (1.0 + d));
      // Delta is (p/q)^Phi: multiplicative iff Phi is additive, checked exactly.
      const auto ab = a * b;
      if (ab.phi() != a.phi() + b.phi() || ab.t_part().k != ab.h_part().n) ++modular_bad;
      if (std::abs(modular(ab) - modular(a) * modular(b)) > 1e-12 * modular(ab)) ++modular_bad;
    }
    for (std::int64_t p : {2, 3}) {
      std::string bp = "a";
      for (std::int64_t i = 0; i < p; ++i) bp = "b" + bp;
      const BsMatrix lhs = evaluate_bs_word(parse_bs_word("ab"), p), rhs = evaluate_bs_word(parse_bs_word(bp), p);
      if (!(lhs == rhs)) ++bs_bad;
      const AfElement x = embed_bs(lhs, p), y = embed_bs(rhs, p);
      for (int i = 0; i < 100; ++i) {
        const TreeVertex v = fixtures::random_vertex(g, p);
        if (!(act(x, v) == act(y, v))) ++bs_bad;
      }
    }
    const std::size_t triples = sz_.geo_pairs;
    for (std::size_t i = 0; i < triples; ++i) {
      const std::int64_t p = 2 + static_cast<std::int64_t>(i % 2);
      const auto u = fixtures::random_padic(g, p), v = fixtures::random_padic(g, p), w = fixtures::random_padic(g, p);
      if (!(std::min((u - v).valuation(), (v - w).valuation()) <= (u - w).valuation())) ++ultra_bad;
    }
    r.pass = iso_err <= 1e-8 && modular_bad == 0 && bs_bad == 0 && ultra_bad == 0;
    r.summary = std::to_string(sz_.group_n) + " elements: max isometry defect " + fmt(iso_err, 3) +
                " (<= 1e-8), modular failures " + std::to_string(modular_bad) + ", BS failures " +
                std::to_string(bs_bad) + ", ultrametric failures " + std::to_string(ultra_bad) + "/" +
                std::to_string(triples);
    r.details = {{"elements", sz_.group_n}, {"maxIsometryDefect", iso_err}, {"modularFailures", modular_bad},
                 {"bsFailures", bs_bad},    {"ultraTriples", triples},      {"ultraFailures", ultra_bad}};
  }

  // 10. Exit measure from the origin and from a group-shifted start.
  void c10(CriterionResult& r) {
    r.title = "exit measure";
    const ModelParams m(2, 2, 1, 1);
    const std::size_t n = sz_.exits;
    const ExitMeasure em = exit_measure_histogram(m, ht_origin(2), n, seed(10, 0), sz_.dt);
    const SkeletonProbs sp = skeleton_probs(m);
    const TreeVertex o = TreeVertex::root(2);
    const double dn = static_cast<double>(n);
    bool masses_ok = true;
    nlohmann::json masses = nlohmann::json::array();
    std::vector<TreeVertex> lines{o.predecessor()};
    for (const auto& c : o.successors()) lines.push_back(c);
    int hit = 0;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      const double target = k == 0 ? sp.down_z : sp.up_each_child;
      const double got = static_cast<double>(em.count_for(lines[k])) / dn;
      const bool ok = std::abs(got - target) <= 3.0 * binom_se(target, dn);
      masses_ok = masses_ok && ok;
      hit += em.count_for(lines[k]) > 0;
      masses.push_back({{"line", lines[k].to_string()}, {"mass", got}, {"target", target}, {"ok", ok}});
    }
    const bool all_hit = hit == static_cast<int>(lines.size()) && em.lines.size() == lines.size();
    std::vector<double> xs;
    for (const auto& e : em.exits) xs.push_back(e.x);
    const Skewness sk = skewness_jackknife(xs);
    const bool skew_ok = std::abs(sk.value) < 3.0 * sk.se;

    // g = [n = 1, b = 0.7, c = 1]; exits from g o pulled back by g^-1.
    const AfElement g = AfElement::make(2.0, 2, 1, 0.7, PadicRational::integer(2, 1));
    const AfElement gi = invert(g);
    const ExitMeasure shifted = exit_measure_histogram(m, act(g, ht_origin(2)), n, seed(10, 1), sz_.dt);
    std::vector<double> xb;
    std::map<std::string, double> back_counts;
    bool lines_ok = true;
    for (const auto& e : shifted.exits) {
      const HTPoint back = act(gi, HTPoint{e.x, TreePoint::at(e.vertex)});
      xb.push_back(back.x);
      lines_ok = lines_ok && tree_distance(back.w.upper(), o) == 1;
      back_counts[back.w.upper().to_string()] += 1.0;
    }
    const KsResult ks = ks_two_sample(xs, xb);
    const double gate = ks_gate(0.05, n, n);
    bool shifted_mass_ok = true;
    for (const auto& l : lines) {
      const double a = static_cast<double>(em.count_for(l)) / dn;
      const double b = back_counts[l.to_string()] / dn;
      const double pool = 0.5 * (a + b);
      shifted_mass_ok = shifted_mass_ok && std::abs(a - b) <= 3.0 * std::sqrt(2.0 * pool * (1 - pool) / dn);
    }
    // Non-gating: empty bins of the +-5 window.
    int empty = 0;
    for (const auto& l : em.lines)
      for (auto c : l.bins) empty += c == 0;
    r.pass = masses_ok && all_hit && skew_ok && lines_ok && shifted_mass_ok && ks.d < gate;
    std::ostringstream sum;
    sum << "masses";
    for (const auto& j : masses) sum << ' ' << fmt(j["mass"].get<double>(), 4);
    sum << " vs (" << fmt(sp.down_z, 4) << ", " << fmt(sp.up_each_child, 4) << " each), lines hit " << hit << "/"
        << lines.size() << ", skew " << fmt(sk.value, 3) << " (3 SE = " << fmt(3 * sk.se, 3) << "), shifted KS "
        << fmt(ks.d, 4) << " (< " << fmt(gate, 3) << ")" << (shifted_mass_ok && lines_ok ? "" : ", shifted lines differ");
    r.summary = sum.str();
    r.details = {{"samples", n},          {"masses", masses},         {"allLinesHit", all_hit},
                 {"skewness", sk.value},  {"skewSe", sk.se},          {"shiftedKs", to_json(ks)},
                 {"gate", gate},          {"shiftedLinesOk", lines_ok}, {"shiftedMassesOk", shifted_mass_ok},
                 {"emptyBins", empty},    {"histogram", to_json(em)}};
  }

  // 11. Boundary regimes.
  void c11(CriterionResult& r) {
    r.title = "boundary regimes";
    std::ostringstream sum;
    // rho > 1: cone masses of W_T.
    const Ensemble& up = drifted();
    const auto finals = up.at(4);
    bool cones_ok = true;
    nlohmann::json cones = nlohmann::json::array();
    sum << "rho>1 cones";
    for (int level : {1, 2}) {
      const double oracle = cone_mass_oracle(up.m, level, 12, 12);
      const double coarse = cone_mass_oracle(up.m, level, 10, 10);
      for (const ConeMass& c : cone_masses(finals, up.m, level, oracle)) {
        const bool ok = std::abs(c.empirical - c.oracle) <= 3.0 * c.se;
        cones_ok = cones_ok && ok;
        cones.push_back({{"cone", c.cone.to_string()}, {"level", level}, {"empirical", c.empirical},
                         {"oracle", c.oracle}, {"oracleDepth10", coarse}, {"se", c.se}, {"ok", ok}});
        sum << ' ' << fmt(c.empirical, 3);
      }
      sum << " (oracle " << fmt(oracle, 4) << ")";
    }

    // rho < 1: x_T against the Z_infinity series.
    const ModelParams down(2, 2, 1, 0.25);
    const Ensemble low = run_ensemble(down, sz_.dt, 100.0 * exp_tau(down), sz_.paths, seed(11, 0));
    std::vector<double> xt;
    for (const auto& s : low.at(4)) xt.push_back(s.x);
    const ExitMeasure em = exit_measure_histogram(down, ht_origin(2), sz_.exits, seed(11, 1), sz_.dt);
    const auto z = z_infinity_series(exit_pool(em, down), sz_.oracle_n, seed(11, 2));
    const KsResult ks = ks_two_sample(xt, z);
    const double gate = ks_gate(0.05, xt.size(), z.size());
    const bool series_ok = ks.d < gate;
    sum << "; rho<1 KS(x_T, series) " << fmt(ks.d, 4) << " (< " << fmt(gate, 3) << ")";

    // rho = 1: diagnostics only.
    const Ensemble& flat = driftfree();
    std::vector<double> med;
    for (std::size_t k = 1; k <= 4; ++k) {
      std::vector<double> ax;
      for (const auto& s : flat.at(k)) ax.push_back(std::abs(s.x));
      med.push_back(median(ax));
    }
    const bool increasing = std::is_sorted(med.begin(), med.end()) && med.front() < med.back();
    double with_changes = 0.0;
    for (const auto& p : flat.paths) with_changes += p.sign_changes > 0;
    with_changes /= static_cast<double>(flat.paths.size());
    sum << "; rho=1 diag: median |x| " << fmt(med[0], 3) << " -> " << fmt(med[3], 3)
        << (increasing ? " increasing" : " not increasing") << ", paths with level sign changes " << fmt(with_changes, 3);

    r.pass = cones_ok && series_ok;
    r.summary = sum.str();
    r.details = {{"cones", cones},
                 {"seriesKs", to_json(ks)},
                 {"gate", gate},
                 {"downwardHorizon", low.horizon},
                 {"diagnostic",
                  {{"medianAbsX", med}, {"medianIncreasing", increasing}, {"fractionSignChanges", with_changes}}}};
  }
};

}  // namespace acceptance_detail

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<int> ids = options.only;
  if (ids.empty())
    for (int i = 1; i <= 11; ++i) ids.push_back(i);
  for (int id : ids)
    if (id < 1 || id > 11) throw DomainError("acceptance: criteria are numbered 1..11");
  acceptance_detail::Runner runner(options);
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(runner.run(id));
    if (options.on_result) options.on_result(out.back());
  }
  return out;
}

inline bool all_passed(const std::vector<CriterionResult>& rs) {
  return std::all_of(rs.begin(), rs.end(), [](const CriterionResult& r) { return r.pass; });
}

}  // namespace treebolic
