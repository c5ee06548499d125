#pragma once

/**
 * @file sim_particles.hpp
 * @brief Continuous-time block/push dynamics on discrete GT patterns.
 *
 * Every particle on level n carries an exponential clock of rate v_n. When
 * (n,k) rings it is blocked if x^n_k = x^{n-1}_k - 1; otherwise it moves one
 * step right and drags along the diagonal string (n+1,k+1), (n+2,k+2), ...
 * of particles that sat at its old position.
 */

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gt_pattern.hpp"
#include "kernel_dt.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace gtminor {

struct ParticleEvent {
  double time = 0.0;
  int n = 0;
  int k = 0;
  bool blocked = false;
  int moved = 0;  // particles displaced, the ringing one included
};

class InterlacingViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Packed start x^n_k = k - n - 1.
inline DiscreteGTPattern init_packed(int N) {
  if (N < 1) throw std::invalid_argument("init_packed: N must be >= 1");
  DiscreteGTPattern s{BasicGTPattern<long>(N), 0.0};
  for (int n = 1; n <= N; ++n)
    for (int k = 1; k <= n; ++k) s(n, k) = k - n - 1;
  return s;
}

namespace detail {

inline double total_rate(const RateSpec& r, int N) {
  double total = 0;
  for (int n = 1; n <= N; ++n) total += n * r.v(n);
  return total;
}

// Maps u ∈ (0,1) to the ringing particle: the level by cumulative rate n·v_n,
// then k from the position inside that level's share.
inline std::pair<int, int> pick_particle(double u, const RateSpec& r, int N, double total) {
  double target = u * total;
  for (int n = 1; n <= N; ++n) {
    const double share = n * r.v(n);
    if (target < share || n == N) {
      int k = 1 + int(target / r.v(n));
      return {n, std::min(std::max(k, 1), n)};
    }
    target -= share;
  }
  return {N, N};
}

}  // namespace detail

/// Applies the ring of clock (n,k) at the current time; no time advance.
inline ParticleEvent apply_ring(DiscreteGTPattern& s, int n, int k) {
  ParticleEvent e{s.time, n, k, false, 0};
  if (k <= n - 1 && s(n, k) == s(n - 1, k) - 1) {
    e.blocked = true;
    return e;
  }
  const long old = s(n, k);
  s(n, k) = old + 1;
  e.moved = 1;
  const int N = s.depth();
  for (int j = 1; n + j <= N && s(n + j, k + j) == old; ++j) {
    s(n + j, k + j) = old + 1;
    ++e.moved;
  }
  return e;
}

/// One Gillespie step: exponential waiting time at total rate Σ n·v_n, then the ring.
inline ParticleEvent step(DiscreteGTPattern& s, const RateSpec& r, RngStream& rng, bool check_invariants = false) {
  const int N = s.depth();
  if (r.size() < N) throw std::invalid_argument("step: fewer rates than levels");
  const double total = detail::total_rate(r, N);
  s.time += rng.exponential(total);
  const auto [n, k] = detail::pick_particle(rng.uniform(), r, N, total);
  ParticleEvent e = apply_ring(s, n, k);
  e.time = s.time;
  if (check_invariants && !interlaces(s)) throw InterlacingViolation("step: interlacing violated after an event");
  return e;
}

/**
 * Runs events until the next one would pass t_end, then sets time = t_end.
 * `observe(event, state)` sees every ring, blocked ones included.
 */
template <class Observer = NoObserver>
DiscreteGTPattern& run_to(DiscreteGTPattern& s, double t_end, const RateSpec& r, RngStream& rng,
                          bool check_invariants = false, Observer&& observe = {}) {
  if (t_end < s.time) throw std::invalid_argument("run_to: t_end precedes the current time");
  const int N = s.depth();
  if (r.size() < N) throw std::invalid_argument("run_to: fewer rates than levels");
  const double total = detail::total_rate(r, N);
  for (;;) {
    const double next = s.time + rng.exponential(total);
    if (next > t_end) break;
    s.time = next;
    const auto [n, k] = detail::pick_particle(rng.uniform(), r, N, total);
    const ParticleEvent e = apply_ring(s, n, k);
    if (check_invariants && !interlaces(s)) throw InterlacingViolation("run_to: interlacing violated after an event");
    observe(e, s);
  }
  s.time = t_end;
  return s;
}

/// Final patterns of `replicas` independent runs from the packed start.
inline std::vector<DiscreteGTPattern> simulate_particles(int N, double t_end, const RateSpec& r, std::uint64_t seed,
                                                         std::size_t replicas, int workers = 0) {
  return map_replicas(replicas, resolve_workers(workers), [&](std::size_t i) {
    RngStream rng(seed, i);
    DiscreteGTPattern s = init_packed(N);
    run_to(s, t_end, r, rng);
    return s;
  });
}

/// λ^n_k = (τT - x^n_k)/√T. Order within a level is reversed so λ ascends.
inline GTPattern rescale_pattern(const DiscreteGTPattern& s, double tau, double T) {
  const int N = s.depth();
  GTPattern p(N);
  for (int n = 1; n <= N; ++n)
    for (int k = 1; k <= n; ++k) p(n, k) = macroscopic(tau, T, s(n, n + 1 - k));
  return p;
}

}  // namespace gtminor
