#pragma once

/**
 * @file sim_warren.hpp
 * @brief Euler scheme for the drifted Warren process: level-n Brownian
 * motions with drift μ_n, reflected off level n-1 by per-step clamping.
 *
 * The step order is fixed: levels in increasing n, and within a level
 * k = 1..n. The lower barrier max(·, B^{n-1}_{k-1}) is applied before the
 * upper barrier min(·, B^{n-1}_k), both against the already-updated level n-1.
 */

#include <algorithm>
#include <cmath>
#include <span>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gt_pattern.hpp"
#include "kernel_ct.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace gtminor {

struct WarrenRun {
  GTPattern pattern;
  std::uint64_t steps = 0;
  std::uint64_t clamp_events = 0;  // times a barrier actually moved a coordinate
  std::uint64_t clamp_checks = 0;  // barrier comparisons performed

  double clamp_fraction() const { return clamp_checks ? double(clamp_events) / double(clamp_checks) : 0.0; }
};

namespace detail {

inline std::uint64_t step_count(double t_end, double delta) {
  if (!(delta > 0)) throw std::invalid_argument("warren: step size must be > 0");
  if (!(t_end >= 0)) throw std::invalid_argument("warren: t_end must be >= 0");
  return std::uint64_t(std::llround(t_end / delta));
}

// One scheme step with increments dB (Brownian part, already scaled) and step h.
inline void warren_step(GTPattern& b, std::span<const double> dB, double h, const DriftSpec& d, WarrenRun& stats) {
  const int N = b.depth();
  std::size_t idx = 0;
  for (int n = 1; n <= N; ++n) {
    const double drift = d.mu(n) * h;
    for (int k = 1; k <= n; ++k) b(n, k) += drift + dB[idx++];
    if (n == 1) continue;
    for (int k = 1; k <= n; ++k) {
      double& x = b(n, k);
      if (k >= 2) {
        ++stats.clamp_checks;
        const double lower = b(n - 1, k - 1);
        if (x < lower) {
          x = lower;
          ++stats.clamp_events;
        }
      }
      if (k <= n - 1) {
        ++stats.clamp_checks;
        const double upper = b(n - 1, k);
        if (x > upper) {
          x = upper;
          ++stats.clamp_events;
        }
      }
    }
  }
  ++stats.steps;
}

}  // namespace detail

/**
 * Pattern at t_end (number of steps = round(t_end/Δ)), all coordinates
 * started at 0. `observe(step, pattern)` runs after every step.
 */
template <class Observer = NoObserver>
WarrenRun simulate_warren_run(int N, double t_end, double delta, const DriftSpec& d, RngStream& rng,
                              Observer&& observe = {}) {
  if (N < 1 || N > d.size()) throw std::invalid_argument("simulate_warren: N outside [1, drifts]");
  const std::uint64_t steps = detail::step_count(t_end, delta);
  WarrenRun run{GTPattern(N, 0.0)};
  std::vector<double> dB(triangle_size(N));
  const double sd = std::sqrt(delta);
  for (std::uint64_t s = 0; s < steps; ++s) {
    for (double& z : dB) z = sd * rng.normal();
    detail::warren_step(run.pattern, dB, delta, d, run);
    observe(s + 1, run.pattern);
  }
  return run;
}

inline GTPattern simulate_warren(int N, double t_end, double delta, const DriftSpec& d, RngStream& rng) {
  return simulate_warren_run(N, t_end, delta, d, rng).pattern;
}

/**
 * Runs one scheme per step size on a shared Brownian path: the increments of
 * a coarse step are sums of the finest ones. Every Δ must be an integer
 * multiple of the smallest; the finest rung reproduces simulate_warren.
 */
inline std::vector<WarrenRun> simulate_warren_coupled(int N, double t_end, std::span<const double> deltas,
                                                      const DriftSpec& d, RngStream& rng) {
  if (deltas.empty()) return {};
  if (N < 1 || N > d.size()) throw std::invalid_argument("simulate_warren_coupled: N outside [1, drifts]");
  const double fine = *std::min_element(deltas.begin(), deltas.end());
  const std::uint64_t steps = detail::step_count(t_end, fine);
  std::vector<std::uint64_t> ratio;
  for (double h : deltas) {
    const double q = h / fine;
    const auto r = std::uint64_t(std::llround(q));
    if (r == 0 || std::abs(q - double(r)) > 1e-9 * q)
      throw std::invalid_argument("simulate_warren_coupled: step sizes must be integer multiples of the smallest");
    ratio.push_back(r);
  }
  const std::size_t m = triangle_size(N);
  std::vector<WarrenRun> runs(deltas.size(), WarrenRun{GTPattern(N, 0.0)});
  std::vector<std::vector<double>> pending(deltas.size(), std::vector<double>(m, 0.0));
  std::vector<double> dB(m);
  const double sd = std::sqrt(fine);
  for (std::uint64_t s = 1; s <= steps; ++s) {
    for (double& z : dB) z = sd * rng.normal();
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      if (ratio[j] == 1) {
        detail::warren_step(runs[j].pattern, dB, fine, d, runs[j]);
        continue;
      }
      auto& acc = pending[j];
      for (std::size_t i = 0; i < m; ++i) acc[i] += dB[i];
      if (s % ratio[j] == 0) {
        detail::warren_step(runs[j].pattern, acc, fine * double(ratio[j]), d, runs[j]);
        std::fill(acc.begin(), acc.end(), 0.0);
      }
    }
  }
  return runs;
}

inline std::vector<GTPattern> simulate_warren_replicas(int N, double t_end, double delta, const DriftSpec& d,
                                                       std::uint64_t seed, std::size_t replicas, int workers = 0) {
  return map_replicas(replicas, resolve_workers(workers), [&](std::size_t i) {
    RngStream rng(seed, i);
    return simulate_warren(N, t_end, delta, d, rng);
  });
}

}  // namespace gtminor
