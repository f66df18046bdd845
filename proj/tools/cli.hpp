#pragma once

// Command-line front end. parse() turns argv into a validated CliConfig,
// run() executes it. Exit codes: 0 success, 1 usage error, 2 numerical
// failure, 3 acceptance failure (verify).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "treebolic/acceptance.hpp"
#include "treebolic/analysis.hpp"
#include "treebolic/closed_forms.hpp"
#include "treebolic/isometry.hpp"
#include "treebolic/path_sim.hpp"
#include "treebolic/skeleton.hpp"

namespace treebolic::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kAcceptance = 3 };

struct CliConfig {
  std::string command;
  ModelParams model;
  SimConfig sim;  // dt, horizon, seed, record stride, distance recording
  std::optional<double> horizon;  // unset: subcommand default
  std::int64_t paths = 1;
  std::int64_t steps = 100;
  std::int64_t samples = 10000;
  std::int64_t limit_samples = 10000;
  std::int64_t grid = 10000;
  std::int64_t oracle_samples = 20000;
  std::int64_t bins = 20;
  double x_lo = -5.0;
  double x_hi = 5.0;
  double x0 = 0.0;
  std::string out = "-";
  std::string format = "csv";
  std::string word;
  bool quick = false;
  std::uint64_t acceptance_seed = kDefaultAcceptanceSeed;
  std::vector<int> only;
  bool emit_config = false;
};

inline nlohmann::json to_json(const CliConfig& c) {
  nlohmann::json j = {{"command", c.command}, {"seed", c.sim.seed}, {"out", c.out}};
  if (c.command == "verify") {
    j["seed"] = c.acceptance_seed;
    j["quick"] = c.quick;
    j["only"] = c.only;
    return j;
  }
  if (c.command == "bs-word") {
    j["p"] = c.model.p;
    j["word"] = c.word;
    return j;
  }
  j["params"] = treebolic::to_json(c.model);
  if (c.command == "formulas") return j;
  j["dt"] = c.sim.dt;
  j["horizon"] = c.horizon ? nlohmann::json(*c.horizon) : nlohmann::json("default");
  j["paths"] = c.paths;
  if (c.command == "simulate") {
    j["format"] = c.format;
    j["recordStride"] = c.sim.record_stride;
    j["recordDistance"] = c.sim.record_distance;
  }
  if (c.command == "skeleton") {
    j["steps"] = c.steps;
    j["format"] = c.format;
  }
  if (c.command == "exit-measure" || c.command == "boundary") j["samples"] = c.samples;
  if (c.command == "exit-measure") j["window"] = {{"xLo", c.x_lo}, {"xHi", c.x_hi}, {"bins", c.bins}, {"x0", c.x0}};
  if (c.command == "clt") j["limit"] = {{"samples", c.limit_samples}, {"grid", c.grid}};
  if (c.command == "boundary") j["oracleSamples"] = c.oracle_samples;
  return j;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void add_model(CLI::App* sub, CliConfig& c) {
  sub->add_option("--q", c.model.q, "vertical scale q > 1")->required();
  sub->add_option("--p", c.model.p, "tree branching p >= 1 (integer)")->required();
  sub->add_option("--alpha", c.model.alpha, "drift parameter alpha")->required();
  sub->add_option("--beta", c.model.beta, "drift parameter beta > 0")->required();
}

inline void add_sim(CLI::App* sub, CliConfig& c, std::optional<double>& dt, double dt_default) {
  sub->add_option("--dt", dt, "time step (default " + std::to_string(dt_default) + ")");
  sub->add_option("--horizon", c.horizon, "simulation horizon T");
  sub->add_option("--paths", c.paths, "number of paths")->capture_default_str();
  sub->add_option("--seed", c.sim.seed, "master seed; path i uses stream i")->capture_default_str();
}

}  // namespace detail

// Throws UsageError (message names the offending flag) on invalid input.
inline CliConfig parse(const std::vector<std::string>& args) {
  CliConfig c;
  std::optional<double> dt;
  CLI::App app{"Brownian motion on treebolic space HT(q, p)", "treebolic"};
  app.require_subcommand(1, 1);
  app.add_flag("--emit-config", c.emit_config, "echo the resolved configuration as JSON on stderr");

  auto* formulas = app.add_subcommand("formulas", "closed-form skeleton laws as JSON");
  detail::add_model(formulas, c);

  auto* simulate = app.add_subcommand("simulate", "trajectories as CSV or JSONL");
  detail::add_model(simulate, c);
  detail::add_sim(simulate, c, dt, 1e-4);
  simulate->add_option("--out", c.out, "output file ('-' for stdout)");
  simulate->add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  simulate->add_option("--stride", c.sim.record_stride, "record every n-th step")->capture_default_str();
  simulate->add_flag("!--no-dist", c.sim.record_distance, "omit the distance column");

  auto* skeleton = app.add_subcommand("skeleton", "skeleton walk (tau(n), W_tau(n))");
  detail::add_model(skeleton, c);
  detail::add_sim(skeleton, c, dt, 1e-4);
  skeleton->add_option("--steps", c.steps, "skeleton steps per path")->capture_default_str();
  skeleton->add_option("--out", c.out, "output file ('-' for stdout)");
  skeleton->add_option("--format", c.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* escape = app.add_subcommand("escape", "rate-of-escape report (default T = 200 E tau)");
  detail::add_model(escape, c);
  detail::add_sim(escape, c, dt, 1e-3);
  escape->add_option("--out", c.out, "report file ('-' for stdout)");

  auto* clt = app.add_subcommand("clt", "vertical and distance CLT report (default T = 200 E tau)");
  detail::add_model(clt, c);
  detail::add_sim(clt, c, dt, 1e-3);
  clt->add_option("--limit-samples", c.limit_samples, "drift-free limit draws")->capture_default_str();
  clt->add_option("--grid", c.grid, "grid steps of the limit sampler")->capture_default_str();
  clt->add_option("--out", c.out, "report file ('-' for stdout)");

  auto* exit_measure = app.add_subcommand("exit-measure", "first-exit histograms from (x0, o)");
  detail::add_model(exit_measure, c);
  detail::add_sim(exit_measure, c, dt, 1e-4);
  exit_measure->add_option("--samples", c.samples, "number of exits")->capture_default_str();
  exit_measure->add_option("--x0", c.x0, "start abscissa")->capture_default_str();
  exit_measure->add_option("--xlo", c.x_lo, "histogram window")->capture_default_str();
  exit_measure->add_option("--xhi", c.x_hi, "histogram window")->capture_default_str();
  exit_measure->add_option("--bins", c.bins, "histogram bins")->capture_default_str();
  exit_measure->add_option("--out", c.out, "report file ('-' for stdout)");

  auto* boundary = app.add_subcommand("boundary", "boundary diagnostics for the regime of rho");
  detail::add_model(boundary, c);
  detail::add_sim(boundary, c, dt, 1e-3);
  boundary->add_option("--samples", c.samples, "first exits for the series pool (rho < 1)")->capture_default_str();
  boundary->add_option("--oracle-samples", c.oracle_samples, "series oracle draws (rho < 1)")->capture_default_str();
  boundary->add_option("--out", c.out, "report file ('-' for stdout)");

  auto* bs = app.add_subcommand("bs-word", "evaluate a Baumslag-Solitar word in A(p, p)");
  bs->add_option("--p", c.model.p, "p >= 2")->required();
  bs->add_option("word", c.word, "word in a, b, A, B with optional ^n exponents")->required();

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_flag("--quick", c.quick, "reduced sample sizes");
  verify->add_option("--seed", c.acceptance_seed, "master seed")->capture_default_str();
  verify->add_option("--only", c.only, "criteria to run (1..11)")->delimiter(',');
  verify->add_option("--out", c.out, "JSON report file (PASS/FAIL lines go to stdout)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  const bool coarse = c.command == "escape" || c.command == "clt" || c.command == "boundary";
  c.sim.dt = dt.value_or(coarse ? 1e-3 : 1e-4);

  try {
    if (c.command == "bs-word") {
      if (c.model.p < 2) throw UsageError("--p: bs-word needs p >= 2");
      parse_bs_word(c.word);
      return c;
    }
    if (c.command == "verify") {
      for (int id : c.only)
        if (id < 1 || id > 11) throw UsageError("--only: criteria are numbered 1..11");
      return c;
    }
    if (!(c.model.q > 1.0)) throw UsageError("--q: must exceed 1");
    if (c.model.p < 1) throw UsageError("--p: must be >= 1");
    if (!(c.model.beta > 0.0)) throw UsageError("--beta: must be positive");
    c.model.validate();
    if (c.command == "formulas") return c;
    if (!(c.sim.dt > 0.0) || c.sim.dt > 1e-2) throw UsageError("--dt: must lie in (0, 1e-2]");
    if (c.horizon && !(*c.horizon >= c.sim.dt)) throw UsageError("--horizon: must be at least dt");
    if (c.paths < 1) throw UsageError("--paths: must be >= 1");
    if (c.steps < 1) throw UsageError("--steps: must be >= 1");
    if (c.samples < 1) throw UsageError("--samples: must be >= 1");
    if (c.sim.record_stride < 1) throw UsageError("--stride: must be >= 1");
    if (c.bins < 1 || !(c.x_hi > c.x_lo)) throw UsageError("--bins/--xlo/--xhi: empty histogram window");
    if (c.grid < 1000) throw UsageError("--grid: must be >= 1000");
    if (c.limit_samples < 1 || c.oracle_samples < 1) throw UsageError("--limit-samples/--oracle-samples: must be >= 1");
    if (c.command == "clt" && c.paths < 2) throw UsageError("--paths: clt needs at least 2 paths");
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return c;
}

namespace detail {

struct Output {
  std::ofstream file;
  std::ostream* os;
  explicit Output(const std::string& path, std::ostream& fallback) : os(&fallback) {
    if (path != "-") {
      file.open(path, std::ios::binary);
      if (!file) throw UsageError("--out: cannot open " + path);
      os = &file;
    }
  }
};

inline nlohmann::json header(const CliConfig& c) {
  return {{"command", c.command},
          {"params", treebolic::to_json(c.model)},
          {"seed", c.sim.seed},
          {"streams", "path i uses stream i"},
          {"dt", c.sim.dt}};
}

inline std::vector<double> distances(const std::vector<PathState>& finals, const ModelParams& m) {
  std::vector<double> d(finals.size());
  for (std::size_t i = 0; i < finals.size(); ++i) d[i] = distance_to_origin(finals[i], m);
  return d;
}

inline int run_simulate(const CliConfig& c, std::ostream& out) {
  SimConfig sim = c.sim;
  sim.horizon = c.horizon.value_or(1.0);
  sim.validate();
  const auto results = parallel_map(static_cast<std::size_t>(c.paths), [&](std::size_t i) {
    RngStream rng(sim.seed, i);
    return simulate_path(c.model, sim, ht_origin(c.model.p), rng, i).records;
  });
  Output o(c.out, out);
  if (c.format == "csv") *o.os << kCsvHeader << '\n';
  for (const auto& recs : results)
    for (const auto& r : recs) {
      if (c.format == "csv") write_csv_row(*o.os, r);
      else write_jsonl_row(*o.os, r);
    }
  return kOk;
}

inline int run_skeleton_cmd(const CliConfig& c, std::ostream& out) {
  const auto walks = parallel_map(static_cast<std::size_t>(c.paths), [&](std::size_t i) {
    RngStream rng(c.sim.seed, i);
    return run_skeleton(c.model, c.steps, rng, c.sim.dt);
  });
  Output o(c.out, out);
  if (c.format == "csv") *o.os << "path,n,clock,vertex,level\n";
  for (std::size_t i = 0; i < walks.size(); ++i)
    for (const auto& s : walks[i]) {
      if (c.format == "csv") {
        *o.os << i << ',' << s.n << ',' << format_double(s.clock) << ",\"" << s.vertex.to_string() << "\","
              << s.vertex.level() << '\n';
      } else {
        *o.os << nlohmann::json{{"path", i}, {"n", s.n}, {"clock", s.clock}, {"vertex", s.vertex.to_string()},
                                {"level", s.vertex.level()}}
                     .dump()
              << '\n';
      }
    }
  return kOk;
}

// Paths to T with the state at T/2 kept as well.
inline std::pair<std::vector<PathState>, std::vector<PathState>> run_with_half(const CliConfig& c, double horizon) {
  SimConfig sim = c.sim;
  const auto half = static_cast<std::int64_t>(std::ceil(horizon / (2.0 * sim.dt) - 1e-9));
  sim.horizon = 2.0 * static_cast<double>(half) * sim.dt;
  sim.record_stride = half;
  sim.record_distance = false;
  sim.validate();
  const auto both = parallel_map(static_cast<std::size_t>(c.paths), [&](std::size_t i) {
    RngStream rng(sim.seed, i);
    std::vector<PathState> marks;
    simulate_path(c.model, sim, ht_origin(c.model.p), rng, [&](const PathState& s) { marks.push_back(s); });
    return marks;
  });
  std::vector<PathState> mid, fin;
  for (const auto& m : both) {
    mid.push_back(m.at(1));
    fin.push_back(m.back());
  }
  return {mid, fin};
}

inline int run_escape(const CliConfig& c, std::ostream& out) {
  const double horizon = c.horizon.value_or(200.0 * exp_tau(c.model));
  const auto [mid, fin] = run_with_half(c, horizon);
  const double t = fin.front().t;
  const EscapeEstimate e = estimate_escape_rate(fin, c.model, t);
  std::vector<double> inc(fin.size());
  for (std::size_t i = 0; i < fin.size(); ++i)
    inc[i] = (distance_to_origin(fin[i], c.model) - distance_to_origin(mid[i], c.model)) / (t - mid[i].t);
  nlohmann::json j = header(c);
  j["horizon"] = t;
  j["paths"] = c.paths;
  j["ell"] = escape_rate(c.model);
  j["target"] = e.target;
  j["distanceRate"] = to_json(e.distance_rate);
  j["treeRate"] = to_json(e.tree_rate);
  j["incrementRate"] = to_json(summarize(inc));
  *Output(c.out, out).os << j.dump(2) << '\n';
  return kOk;
}

inline int run_clt(const CliConfig& c, std::ostream& out) {
  const double horizon = c.horizon.value_or(200.0 * exp_tau(c.model));
  const auto [mid, fin] = run_with_half(c, horizon);
  const double t = fin.front().t;
  std::vector<double> y;
  for (const auto& s : fin) y.push_back(s.y);
  const auto d = distances(fin, c.model);
  nlohmann::json j = header(c);
  j["horizon"] = t;
  j["paths"] = c.paths;
  j["sigma2"] = clt_sigma2(c.model);
  j["vertical"] = to_json(vertical_clt(y, t, c.model));
  if (classify_regime(c.model) == Regime::Critical) {
    std::vector<double> lim;
    for (const auto& x :
         drift_free_limit_samples(c.model, static_cast<std::size_t>(c.limit_samples), c.sim.seed, c.grid, 1u << 30))
      lim.push_back(x.value);
    j["driftFree"] = {{"ks", to_json(drift_free_clt(d, t, c.model, lim))},
                      {"limit", to_json(summarize(lim))},
                      {"limitStreams", "from 2^30"}};
  } else {
    j["distance"] = to_json(distance_clt(d, t, c.model));
    j["distanceVarianceRate"] = c.model.log_q() * c.model.log_q() * clt_sigma2(c.model);
  }
  *Output(c.out, out).os << j.dump(2) << '\n';
  return kOk;
}

inline int run_exit_measure(const CliConfig& c, std::ostream& out) {
  const HTPoint start{c.x0, TreePoint::at(TreeVertex::root(c.model.p))};
  const ExitMeasure em = exit_measure_histogram(c.model, start, static_cast<std::size_t>(c.samples), c.sim.seed,
                                                c.sim.dt, 0, c.x_lo + c.x0, c.x_hi + c.x0, static_cast<int>(c.bins));
  const SkeletonProbs sp = skeleton_probs(c.model);
  nlohmann::json j = header(c);
  j["histogram"] = to_json(em);
  j["targets"] = {{"down", sp.down_z}, {"eachChild", sp.up_each_child}};
  std::vector<double> xs;
  for (const auto& e : em.exits) xs.push_back(e.x - c.x0);
  if (xs.size() >= 3) {
    const Skewness sk = skewness_jackknife(xs);
    j["skewness"] = {{"value", sk.value}, {"se", sk.se}};
  }
  *Output(c.out, out).os << j.dump(2) << '\n';
  return kOk;
}

inline int run_boundary(const CliConfig& c, std::ostream& out) {
  const Regime regime = classify_regime(c.model);
  nlohmann::json j = header(c);
  j["regime"] = to_string(regime);
  j["paths"] = c.paths;
  if (regime == Regime::Downward) {
    const double horizon = c.horizon.value_or(100.0 * exp_tau(c.model));
    const auto [mid, fin] = run_with_half(c, horizon);
    std::vector<double> xt;
    for (const auto& s : fin) xt.push_back(s.x);
    const ExitMeasure em = exit_measure_histogram(c.model, ht_origin(c.model.p), static_cast<std::size_t>(c.samples),
                                                  c.sim.seed, c.sim.dt, 1u << 30);
    const auto z = z_infinity_series(exit_pool(em, c.model), static_cast<std::size_t>(c.oracle_samples), c.sim.seed,
                                     0.0, 1e-12, 1u << 31);
    j["horizon"] = fin.front().t;
    j["seriesKs"] = to_json(ks_two_sample(xt, z));
    j["pathX"] = to_json(summarize(xt));
    j["series"] = to_json(summarize(z));
    j["streams"] = "paths from 0, exits from 2^30, series from 2^31";
  } else {
    const double horizon = c.horizon.value_or(200.0 * exp_tau(c.model));
    const auto [mid, fin] = run_with_half(c, horizon);
    j["horizon"] = fin.front().t;
    if (regime == Regime::Upward) {
      nlohmann::json cones = nlohmann::json::array();
      for (int level : {1, 2}) {
        const double oracle = cone_mass_oracle(c.model, level, 12, 12);
        const double coarse = cone_mass_oracle(c.model, level, 10, 10);
        for (const auto& cm : cone_masses(fin, c.model, level, oracle))
          cones.push_back({{"cone", cm.cone.to_string()}, {"level", level}, {"count", cm.count},
                           {"empirical", cm.empirical}, {"oracle", cm.oracle}, {"oracleDepth10", coarse},
                           {"se", cm.se}});
      }
      j["cones"] = cones;
    } else {
      std::vector<double> a_mid, a_fin, hor;
      for (std::size_t i = 0; i < fin.size(); ++i) {
        a_mid.push_back(std::abs(mid[i].x));
        a_fin.push_back(std::abs(fin[i].x));
        hor.push_back(fin[i].y);
      }
      auto med = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
      };
      j["medianAbsX"] = {{"half", med(a_mid)}, {"final", med(a_fin)}};
      j["horFinal"] = to_json(summarize(hor));
      std::int64_t neg = 0;
      for (double h : hor) neg += h < 0.0;
      j["fractionBelowOrigin"] = static_cast<double>(neg) / static_cast<double>(hor.size());
    }
  }
  *Output(c.out, out).os << j.dump(2) << '\n';
  return kOk;
}

}  // namespace detail

inline int run(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.emit_config) err << to_json(c).dump() << '\n';
  try {
    if (c.command != "verify" && c.command != "bs-word") c.model.validate();
    if (c.command == "formulas") {
      nlohmann::json j = {{"params", treebolic::to_json(c.model)}, {"closedForms", to_json(closed_forms(c.model))}};
      out << j.dump(2) << '\n';
      return kOk;
    }
    if (c.command == "bs-word") {
      const AfElement g = bs_word(c.word, c.model.p);
      out << g.to_string() << '\n';
      return kOk;
    }
    if (c.command == "verify") {
      AcceptanceOptions opt;
      opt.quick = c.quick;
      opt.seed = c.acceptance_seed;
      opt.only = c.only;
      opt.on_result = [&](const CriterionResult& r) { out << format_line(r) << std::endl; };
      const auto results = run_acceptance(opt);
      if (c.out != "-") {
        nlohmann::json rep = nlohmann::json::array();
        for (const auto& r : results) rep.push_back(to_json(r));
        detail::Output o(c.out, out);
        *o.os << rep.dump(2) << '\n';
      }
      return all_passed(results) ? kOk : kAcceptance;
    }
    if (c.command == "simulate") return detail::run_simulate(c, out);
    if (c.command == "skeleton") return detail::run_skeleton_cmd(c, out);
    if (c.command == "escape") return detail::run_escape(c, out);
    if (c.command == "clt") return detail::run_clt(c, out);
    if (c.command == "exit-measure") return detail::run_exit_measure(c, out);
    if (c.command == "boundary") return detail::run_boundary(c, out);
    err << "unknown command " << c.command << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

// argv[0] excluded.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  try {
    c = parse(args);
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  return run(c, out, err);
}

}  // namespace treebolic::cli
