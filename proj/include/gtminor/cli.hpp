#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: simulate, kernel-eval, verify, report.
 *
 * Every subcommand accepts `--config FILE`, a flat JSON object whose keys are
 * the long flag names without dashes. Flags given on the command line win
 * over config keys.
 */

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"
#include "kernel_ct.hpp"
#include "kernel_dt.hpp"
#include "parallel.hpp"
#include "sim_matrix.hpp"
#include "sim_particles.hpp"
#include "sim_warren.hpp"
#include "verify.hpp"

namespace gtminor::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateOptions {
  std::string model;
  int N = 0;
  std::string drifts;
  std::string rates;
  double t = 1.0;
  double T = 0.0;
  double tau = 1.0;
  double delta = 1e-4;
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
  int workers = 0;
  bool raw = false;
  std::string out = "-";
  std::string events;
  std::string trajectory;
  std::uint64_t stride = 100;
};

struct KernelEvalOptions {
  std::string which = "continuous";
  double t = 1.0;
  double T = 100.0;
  double tau = 1.0;
  std::string drifts;
  std::string rates;
  std::string grid = "-4:4:0.05";
  std::string levels;
  int workers = 0;
  std::string out = "-";
};

struct VerifyOptions {
  std::string suite;
  int N = 3;
  std::uint64_t seed = 0;
  int vectors = 2;
  std::string drifts;
  double t = 1.0;
  std::string model = "matrix";
  std::size_t replicas = 20000;
  double delta = 1e-3;
  std::string ladder;
  std::string Ts = "100,400,1600";
  double tau = 1.0;
  std::optional<double> threshold;
  std::string statistic = "L1";
  int workers = 0;
  std::string out = "-";
};

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out = "-";
};

namespace detail {

inline DriftSpec drifts_or_zero(const std::string& list, int N) {
  if (!list.empty()) {
    auto mu = parse_list(list);
    if (N > 0 && int(mu.size()) != N)
      throw ConfigError("drifts: expected " + std::to_string(N) + " values, got " + std::to_string(mu.size()));
    return DriftSpec(std::move(mu));
  }
  if (N < 1) throw ConfigError("either --drifts or --N must be given");
  return DriftSpec(std::vector<double>(static_cast<std::size_t>(N), 0.0));
}

inline std::vector<int> parse_levels(const std::string& s, int N) {
  std::vector<int> out;
  if (s.empty()) {
    for (int n = 1; n <= N; ++n) out.push_back(n);
    return out;
  }
  for (double v : parse_list(s)) {
    const int n = int(v);
    if (double(n) != v || n < 1 || n > N) throw ConfigError("levels: " + format_value(v) + " is not a level in 1.." + std::to_string(N));
    out.push_back(n);
  }
  return out;
}

inline std::string json_text(const json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate

inline int run_simulate(const SimulateOptions& o) {
  const int workers = resolve_workers(o.workers);
  if (o.model == "matrix") {
    const DriftSpec d = detail::drifts_or_zero(o.drifts, o.N);
    write_text(o.out, patterns_csv(simulate_matrix(d.size(), o.t, d, o.seed, o.replicas, workers)));
    return 0;
  }
  if (o.model == "warren") {
    const DriftSpec d = detail::drifts_or_zero(o.drifts, o.N);
    const int N = d.size();
    if (o.trajectory.empty()) {
      write_text(o.out, patterns_csv(simulate_warren_replicas(N, o.t, o.delta, d, o.seed, o.replicas, workers)));
      return 0;
    }
    if (o.stride == 0) throw ConfigError("stride: must be >= 1");
    struct Result {
      GTPattern pattern;
      std::string rows;
    };
    const auto results = map_replicas(o.replicas, workers, [&](std::size_t i) {
      RngStream rng(o.seed, i);
      Result r;
      auto observe = [&](std::uint64_t step, const GTPattern& p) {
        if (step % o.stride != 0) return;
        for (int n = 1; n <= N; ++n)
          for (int k = 1; k <= n; ++k)
            r.rows += std::to_string(i) + ',' + format_value(double(step) * o.delta) + ',' + std::to_string(n) + ',' +
                      std::to_string(k) + ',' + format_value(p(n, k)) + '\n';
      };
      r.pattern = simulate_warren_run(N, o.t, o.delta, d, rng, observe).pattern;
      return r;
    });
    std::vector<GTPattern> finals;
    std::string traj = "replica,time,n,k,value\n";
    for (const auto& r : results) {
      finals.push_back(r.pattern);
      traj += r.rows;
    }
    write_text(o.trajectory, traj);
    write_text(o.out, patterns_csv(finals));
    return 0;
  }
  if (o.model == "particles") {
    std::optional<RateSpec> rates;
    double t_end = o.t;
    const bool scaled = o.rates.empty();
    if (scaled) {
      if (!(o.T > 0)) throw ConfigError("T: particles need --T (with drifts) or explicit --rates");
      const DriftSpec d = detail::drifts_or_zero(o.drifts, o.N);
      rates = RateSpec::from_drifts(d, o.T);
      t_end = o.tau * o.T;
    } else {
      rates = RateSpec(parse_list(o.rates));
      if (o.N > 0 && o.N != rates->size()) throw ConfigError("rates: expected N values");
    }
    const int N = rates->size();
    struct Result {
      DiscreteGTPattern state;
      std::string rows;
    };
    const bool log_events = !o.events.empty();
    const auto results = map_replicas(o.replicas, workers, [&](std::size_t i) {
      RngStream rng(o.seed, i);
      Result r{init_packed(N), {}};
      auto observe = [&](const ParticleEvent& e, const DiscreteGTPattern& s) {
        if (!log_events) return;
        for (int j = 0; j < e.moved; ++j)
          r.rows += std::to_string(i) + ',' + format_value(s.time) + ',' + std::to_string(e.n + j) + ',' +
                    std::to_string(e.k + j) + ',' + std::to_string(s(e.n + j, e.k + j)) + '\n';
      };
      run_to(r.state, t_end, *rates, rng, false, observe);
      return r;
    });
    if (log_events) {
      std::string text = "replica,time,n,k,x\n";
      for (const auto& r : results) text += r.rows;
      write_text(o.events, text);
    }
    if (scaled && !o.raw) {
      std::vector<GTPattern> out;
      for (const auto& r : results) out.push_back(rescale_pattern(r.state, o.tau, o.T));
      write_text(o.out, patterns_csv(out));
    } else {
      std::vector<BasicGTPattern<long>> out;
      for (const auto& r : results) out.push_back(r.state.positions);
      write_text(o.out, patterns_csv(out));
    }
    return 0;
  }
  throw ConfigError("model: expected particles, matrix or warren, got '" + o.model + "'");
}

// ---------------------------------------------------------------------------
// kernel-eval

inline json kernel_grid(const KernelEvalOptions& o) {
  const std::vector<double> grid = parse_grid(o.grid);
  json out{{"which", o.which}, {"grid", o.grid}};
  std::function<double(double, int)> rho;
  int N = 0;
  std::optional<DriftSpec> d;
  std::optional<RateSpec> r;
  if (o.which == "continuous") {
    d = detail::drifts_or_zero(o.drifts, 0);
    N = d->size();
    out["t"] = o.t;
    out["drifts"] = std::vector<double>(d->drifts().begin(), d->drifts().end());
    rho = [&](double x, int n) { return kernel(o.t, {x, n}, {x, n}, *d); };
  } else if (o.which == "discrete") {
    if (o.rates.empty()) throw ConfigError("rates: required for the discrete kernel");
    r = RateSpec(parse_list(o.rates));
    N = r->size();
    for (double x : grid)
      if (x != std::floor(x)) throw ConfigError("grid: the discrete kernel needs integer grid points");
    out["t"] = o.t;
    out["rates"] = std::vector<double>(r->rates().begin(), r->rates().end());
    rho = [&](double x, int n) { return kernel_d(o.t, {long(x), n}, {long(x), n}, *r); };
  } else if (o.which == "rescaled") {
    d = detail::drifts_or_zero(o.drifts, 0);
    N = d->size();
    out["tau"] = o.tau;
    out["T"] = o.T;
    out["drifts"] = std::vector<double>(d->drifts().begin(), d->drifts().end());
    rho = [&](double x, int n) { return rescaled_kernel(o.tau, o.T, {x, n}, {x, n}, *d); };
  } else {
    throw ConfigError("which: expected continuous, discrete or rescaled, got '" + o.which + "'");
  }
  const auto levels = detail::parse_levels(o.levels, N);
  json lv = json::array();
  for (int n : levels) {
    std::vector<double> values(grid.size());
    parallel_for(grid.size(), resolve_workers(o.workers), [&](std::size_t i) { values[i] = rho(grid[i], n); });
    lv.push_back({{"n", n}, {"x", grid}, {"rho", values}});
  }
  out["levels"] = lv;
  return out;
}

inline int run_kernel_eval(const KernelEvalOptions& o) {
  write_text(o.out, detail::json_text(kernel_grid(o)));
  return 0;
}

// ---------------------------------------------------------------------------
// verify

inline std::vector<DistanceReport> identities_suite(int N, std::uint64_t seed, int vectors) {
  if (N < 1 || N > 8) throw ConfigError("N: identities suite supports 1 <= N <= 8");
  RngStream rng(seed, 0);
  double bi = 0, conv = 0, semi = 0, below = 0, diag = 0, det = 0, eq42 = 0, oracle = 0, dbi = 0;
  const double ts[] = {0.5, 1.0, 2.0};
  for (int v = 0; v < vectors; ++v) {
    const DriftSpec d = random_drifts(N, rng);
    for (double t : ts) {
      for (int n = 1; n <= N; ++n) bi = std::max(bi, biorthogonality_error(n, t, d));
      for (int n = 2; n <= N; ++n)
        for (double x : {-1.0, 0.3, 1.7}) conv = std::max(conv, convolution_error(n, t, x, d));
      const auto c = check_normalization(t, d);
      below = std::max(below, c.max_below_diagonal);
      diag = std::max(diag, c.max_diagonal_error);
      det = std::max(det, c.det_relative_error);
      for (int n = 1; n <= N && N >= 2; ++n) {
        for (int l = 1; l <= n; ++l) oracle = std::max(oracle, std::abs(phi_cap(n, l, t, 0.4, d) - phi_cap_contour(n, l, t, 0.4, d)));
      }
    }
    for (int n = 0; n < N; ++n)
      for (int n2 = n + 2; n2 <= std::min(N, n + 3); ++n2) {
        semi = std::max(semi, semigroup_error(n, n2, 1.0, -0.5, d));
        semi = std::max(semi, semigroup_error(n, n2, 0.2, -1.3, d));
        oracle = std::max(oracle, std::abs(phi_transition(n, n2, 1.0, -0.5, d) - phi_transition_contour(n, n2, 1.0, -0.5, d)));
      }
    if (N >= 2) {
      const DriftSpec d2(std::vector<double>(d.drifts().begin(), d.drifts().begin() + 2));
      std::vector<GTPattern> patterns;
      for (int i = 0; i < 10; ++i) patterns.push_back(random_pattern(2, rng, 0.0, 2.5, 1e-3));
      eq42 = std::max(eq42, full_pattern_identity(1.0, d2, patterns));
    }
    const int M = std::min(N, 4);
    const RateSpec r = random_rates(M, rng);
    for (double t : {1.0, 5.0})
      for (int n = 1; n <= M; ++n) dbi = std::max(dbi, discrete_biorthogonality_error(n, t, r));
  }
  std::vector<DistanceReport> out{
      DistanceReport::make("biorthogonality", Statistic::Sup, bi, 1e-7),
      DistanceReport::make("convolution", Statistic::Sup, conv, 1e-6),
      DistanceReport::make("normalization below diagonal", Statistic::Sup, below, 1e-8),
      DistanceReport::make("normalization diagonal", Statistic::Sup, diag, 1e-9),
      DistanceReport::make("normalization determinant (relative)", Statistic::Sup, det, 1e-8),
      DistanceReport::make("residue sums vs contour quadrature", Statistic::Sup, oracle, 1e-9),
      DistanceReport::make("discrete biorthogonality", Statistic::Sup, dbi, 1e-8),
  };
  if (N >= 2) out.push_back(DistanceReport::make("semigroup", Statistic::Sup, semi, 1e-6));
  if (N >= 2) out.push_back(DistanceReport::make("density as correlation (N=2, relative)", Statistic::Sup, eq42, 1e-6));
  return out;
}

inline std::vector<DistanceReport> mc_suite(const VerifyOptions& o) {
  const DriftSpec d = detail::drifts_or_zero(o.drifts, o.drifts.empty() ? o.N : 0);
  const Statistic stat = parse_statistic(o.statistic);
  const int workers = resolve_workers(o.workers);
  std::vector<GTPattern> samples;
  double threshold = 0;
  if (o.model == "matrix") {
    samples = simulate_matrix(d.size(), o.t, d, o.seed, o.replicas, workers);
    threshold = o.threshold.value_or(0.03);
  } else if (o.model == "warren") {
    samples = simulate_warren_replicas(d.size(), o.t, o.delta, d, o.seed, o.replicas, workers);
    threshold = o.threshold.value_or(0.05);
  } else {
    throw ConfigError("model: mc-vs-kernel supports matrix or warren, got '" + o.model + "'");
  }
  const auto edges = default_edges(o.t, d);
  std::vector<DistanceReport> out;
  std::vector<double> shifted_mu(d.drifts().begin(), d.drifts().end());
  for (double& m : shifted_mu) m += 0.5;
  const DriftSpec shifted(shifted_mu);
  for (int n = 1; n <= d.size(); ++n) {
    const auto est = estimate_one_point(samples, n, edges);
    auto rep = compare_to_kernel(est, o.t, d, threshold, stat);
    rep.test = o.model + " level " + std::to_string(n) + " vs kernel";
    out.push_back(rep);
    if (stat == Statistic::L1) {
      // Power check: the same statistic must reject drifts shifted by 0.5.
      const double wrong = compare_to_kernel(est, o.t, shifted, threshold, stat).value;
      out.push_back(DistanceReport::range(o.model + " level " + std::to_string(n) + " rejects drift+0.5", stat, wrong,
                                          threshold, 2.0));
    }
  }
  if (o.model == "warren" && !o.ladder.empty()) {
    const auto deltas = parse_list(o.ladder);
    const auto rows = convergence_ladder(d.size(), o.t, deltas, d, o.seed, o.replicas, workers);
    std::vector<double> dist;
    for (const auto& r : rows) {
      dist.push_back(r.max_distance);
      out.push_back(DistanceReport::make("warren ladder delta=" + format_value(r.parameter), Statistic::L1,
                                         r.max_distance, threshold));
    }
    double worst = 0;
    for (std::size_t i = 1; i < dist.size(); ++i) worst = std::max(worst, dist[i] / dist[i - 1]);
    out.push_back(DistanceReport::make("warren ladder non-increasing", Statistic::Ratio, worst, 1.1));
  }
  return out;
}

/// Five (ξ, level) points used for the pointwise rescaled-kernel check.
inline std::vector<KernelPoint> scaling_probe_points(int N) {
  std::vector<KernelPoint> pts;
  const double xis[] = {-1.0, -0.4, 0.0, 0.5, 1.2};
  for (int i = 0; i < 5; ++i) pts.push_back({xis[i], 1 + i % N});
  return pts;
}

inline std::vector<DistanceReport> scaling_suite(const VerifyOptions& o) {
  const DriftSpec d = o.drifts.empty() ? DriftSpec({-1.0, 0.0, 1.0}) : detail::drifts_or_zero(o.drifts, 0);
  const auto Ts = parse_list(o.Ts);
  const double threshold = o.threshold.value_or(0.05);
  const auto rows = scaling_study(o.tau, Ts, d, o.seed, o.replicas, o.workers);
  std::vector<DistanceReport> out;
  std::vector<double> dist;
  for (const auto& r : rows) {
    dist.push_back(r.max_distance);
    out.push_back(DistanceReport::make("particles T=" + format_value(r.parameter) + " vs kernel", Statistic::L1,
                                       r.max_distance, r.parameter == Ts.back() ? threshold : 2.0));
  }
  double worst = 0;
  for (std::size_t i = 1; i < dist.size(); ++i) worst = std::max(worst, dist[i] / dist[i - 1]);
  out.push_back(DistanceReport::make("scaling distances non-increasing", Statistic::Ratio, worst, 1.1));
  const auto pts = scaling_probe_points(d.size());
  double ratio = 0;
  for (const auto& a : pts)
    for (const auto& b : pts) {
      const double exact = kernel(o.tau, a, b, d);
      double prev = std::numeric_limits<double>::infinity();
      for (double T : Ts) {
        const double err = std::abs(rescaled_kernel(o.tau, T, a, b, d) - exact);
        if (std::isfinite(prev) && prev > 0) ratio = std::max(ratio, err / prev);
        prev = err;
      }
    }
  out.push_back(DistanceReport::make("rescaled kernel error decreasing (max ratio)", Statistic::Ratio, ratio, 1.0));
  return out;
}

struct PdeResult {
  double residual_coarse = 0;
  double residual_fine = 0;
  double boundary = 0;
};

inline PdeResult pde_checks(double t, const DriftSpec& d, std::uint64_t seed, int points = 6) {
  RngStream rng(seed, 0);
  std::vector<GTPattern> grid;
  for (int i = 0; i < points; ++i)
    grid.push_back(random_pattern(d.size(), rng, t * 0.5 * (d.drifts().front() + d.drifts().back()), 2.0 * std::sqrt(t), 0.05));
  PdeResult r;
  r.residual_coarse = fokker_planck_residual(t, grid, 1e-2, d);
  r.residual_fine = fokker_planck_residual(t, grid, 1e-3, d);
  r.boundary = boundary_condition_check(t, grid, d, 1e-4);
  return r;
}

inline std::vector<DistanceReport> pde_suite(const VerifyOptions& o) {
  const DriftSpec d = o.drifts.empty() ? DriftSpec({-1.0, 0.0, 1.0}) : detail::drifts_or_zero(o.drifts, 0);
  const auto r = pde_checks(o.t, d, o.seed);
  return {DistanceReport::range("fokker-planck residual ratio h=1e-2 / h=1e-3", Statistic::Ratio,
                                r.residual_coarse / r.residual_fine, 30.0, 300.0),
          DistanceReport::make("log-derivative boundary identity", Statistic::Sup, r.boundary, 1e-6)};
}

inline int run_verify(const VerifyOptions& o) {
  std::vector<DistanceReport> reports;
  if (o.suite == "identities")
    reports = identities_suite(o.N, o.seed, o.vectors);
  else if (o.suite == "mc-vs-kernel")
    reports = mc_suite(o);
  else if (o.suite == "scaling")
    reports = scaling_suite(o);
  else if (o.suite == "pde")
    reports = pde_suite(o);
  else
    throw ConfigError("suite: expected identities, mc-vs-kernel, scaling or pde, got '" + o.suite + "'");
  json j{{"suite", o.suite}, {"pass", all_pass(reports)}, {"reports", json::array()}};
  for (const auto& r : reports) j["reports"].push_back(to_json(r));
  write_text(o.out, detail::json_text(j));
  return all_pass(reports) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// report

inline int run_report(const ReportOptions& o, std::ostream& table = std::cerr) {
  if (o.inputs.empty()) throw ConfigError("inputs: at least one report file is required");
  std::vector<DistanceReport> all;
  json merged{{"reports", json::array()}};
  for (const auto& path : o.inputs) {
    json j;
    try {
      j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
    const std::string suite = j.value("suite", path);
    for (const auto& r : j.at("reports")) {
      DistanceReport rep = report_from_json(r);
      rep.test = suite + ": " + rep.test;
      all.push_back(rep);
      merged["reports"].push_back(to_json(rep));
    }
  }
  merged["pass"] = all_pass(all);
  std::size_t width = 4;
  for (const auto& r : all) width = std::max(width, r.test.size());
  for (const auto& r : all) {
    table << (r.pass ? "PASS  " : "FAIL  ") << r.test << std::string(width - r.test.size() + 2, ' ')
          << to_string(r.statistic) << " " << format_value(r.value) << " (threshold " << format_value(r.threshold)
          << ")\n";
  }
  write_text(o.out, detail::json_text(merged));
  return all_pass(all) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// argument handling

namespace detail {

inline std::string config_token(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number()) return format_value(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += ',';
      s += config_token(e, key);
    }
    return s;
  }
  throw ConfigError("config: /" + key + ": unsupported value type");
}

/**
 * Rewrites argv so config entries come first and command-line flags later;
 * with last-one-wins parsing the command line overrides the config.
 */
inline std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
  std::string path;
  std::size_t sub_pos = 0;
  const CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (!sub) {
      for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; }))
        if (s->get_name() == args[i]) {
          sub = s;
          sub_pos = i;
        }
    }
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || !sub) return args;
  json cfg;
  try {
    cfg = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ConfigError(path + ": top level must be a JSON object");
  std::vector<std::string> out(args.begin(), args.begin() + std::ptrdiff_t(sub_pos) + 1);
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") throw ConfigError(path + ": /config: nested config files are not supported");
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw ConfigError(path + ": /" + key + ": unknown key for '" + sub->get_name() + "'");
    if (value.is_boolean()) {
      if (opt->get_type_size() != 0) throw ConfigError(path + ": /" + key + ": expected a value, not a boolean");
      if (value.get<bool>()) out.push_back("--" + key);
      continue;
    }
    if (value.is_array() && opt->get_expected_max() > 1) {
      out.push_back("--" + key);
      for (const auto& e : value) out.push_back(config_token(e, key));
      continue;
    }
    out.push_back("--" + key);
    out.push_back(config_token(value, key));
  }
  out.insert(out.end(), args.begin() + std::ptrdiff_t(sub_pos) + 1, args.end());
  return out;
}

}  // namespace detail

/// Parses and runs one command; returns the process exit status.
inline int run(std::vector<std::string> args, std::ostream& err = std::cerr) {
  CLI::App app{"Drifted GUE minor process: kernels, simulators and verification"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "Sample final patterns of one of the three models (CSV)");
  sim->add_option("--config", "JSON key-value file");
  sim->add_option("--model", so.model, "particles | matrix | warren")->required();
  sim->add_option("--N", so.N, "Depth (defaults to the number of drifts)");
  sim->add_option("--drifts", so.drifts, "Comma-separated drifts mu_1..mu_N");
  sim->add_option("--rates", so.rates, "Particles: explicit jump rates (raw positions at time --t)");
  sim->add_option("--t", so.t, "Time horizon (matrix, warren, particles with --rates)");
  sim->add_option("--T", so.T, "Particles: scaling parameter, rates 1 - mu/sqrt(T)");
  sim->add_option("--tau", so.tau, "Particles: macroscopic time, run to tau*T");
  sim->add_option("--delta", so.delta, "Warren: Euler step");
  sim->add_option("--replicas", so.replicas, "Number of independent replicas");
  sim->add_option("--seed", so.seed, "Master seed");
  sim->add_option("--workers", so.workers, "Worker threads (default: $GTMINOR_WORKERS or all cores)");
  sim->add_flag("--raw", so.raw, "Particles: write integer positions instead of rescaled ones");
  sim->add_option("--out", so.out, "Output CSV ('-' for stdout)");
  sim->add_option("--events", so.events, "Particles: event log CSV (replica,time,n,k,x)");
  sim->add_option("--trajectory", so.trajectory, "Warren: trajectory CSV (replica,time,n,k,value)");
  sim->add_option("--stride", so.stride, "Warren: record every stride-th step");

  KernelEvalOptions ko;
  auto* ke = app.add_subcommand("kernel-eval", "Evaluate one-point functions on a grid (JSON)");
  ke->add_option("--config", "JSON key-value file");
  ke->add_option("--which", ko.which, "continuous | discrete | rescaled");
  ke->add_option("--t", ko.t, "Time");
  ke->add_option("--T", ko.T, "Rescaled: scaling parameter");
  ke->add_option("--tau", ko.tau, "Rescaled: macroscopic time");
  ke->add_option("--drifts", ko.drifts, "Comma-separated drifts");
  ke->add_option("--rates", ko.rates, "Discrete: comma-separated jump rates");
  ke->add_option("--grid", ko.grid, "lo:hi:step");
  ke->add_option("--levels", ko.levels, "Comma-separated levels (default all)");
  ke->add_option("--workers", ko.workers, "Worker threads");
  ke->add_option("--out", ko.out, "Output JSON ('-' for stdout)");

  VerifyOptions vo;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  auto* ve = app.add_subcommand("verify", "Run a verification suite (JSON report, exit 0 iff all pass)");
  ve->add_option("--config", "JSON key-value file");
  ve->add_option("--suite", vo.suite, "identities | mc-vs-kernel | scaling | pde")->required();
  ve->add_option("--N", vo.N, "Depth");
  ve->add_option("--seed", vo.seed, "Master seed");
  ve->add_option("--vectors", vo.vectors, "Identities: random drift vectors");
  ve->add_option("--drifts", vo.drifts, "Comma-separated drifts");
  ve->add_option("--t", vo.t, "Time");
  ve->add_option("--model", vo.model, "mc-vs-kernel: matrix | warren");
  ve->add_option("--replicas", vo.replicas, "Monte Carlo replicas");
  ve->add_option("--delta", vo.delta, "Warren: Euler step");
  ve->add_option("--ladder", vo.ladder, "Warren: comma-separated step sizes for the convergence ladder");
  ve->add_option("--Ts", vo.Ts, "Scaling: comma-separated T ladder");
  ve->add_option("--tau", vo.tau, "Scaling: macroscopic time");
  ve->add_option("--threshold", threshold, "Override the distance threshold");
  ve->add_option("--statistic", vo.statistic, "L1 | sup | chi2");
  ve->add_option("--workers", vo.workers, "Worker threads");
  ve->add_option("--out", vo.out, "Output JSON ('-' for stdout)");

  ReportOptions ro;
  auto* re = app.add_subcommand("report", "Merge JSON reports into one summary (exit 0 iff all pass)");
  re->add_option("--config", "JSON key-value file");
  re->add_option("--inputs", ro.inputs, "Report files")->required()->expected(1, -1)->multi_option_policy(
      CLI::MultiOptionPolicy::TakeAll);
  re->add_option("--out", ro.out, "Output JSON ('-' for stdout)");

  try {
    args = detail::expand_config(args, app);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
    if (!std::isnan(threshold)) vo.threshold = threshold;
    if (*sim) return run_simulate(so);
    if (*ke) return run_kernel_eval(ko);
    if (*ve) return run_verify(vo);
    if (*re) return run_report(ro);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

inline int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace gtminor::cli
