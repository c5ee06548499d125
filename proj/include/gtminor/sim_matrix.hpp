#pragma once

/**
 * @file sim_matrix.hpp
 * @brief Fixed-time samples of H(t) = GUE(t) + t·diag(μ) and the eigenvalues
 * of its leading principal minors.
 */

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gt_pattern.hpp"
#include "kernel_ct.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace gtminor {

inline constexpr double kInterlacingSlack = 1e-9;

/// Diagonal Normal(μ_k t, t); off-diagonal (g1 + i g2)/√2 with g ~ Normal(0, t).
inline HermitianMatrix sample_matrix(int N, double t, const DriftSpec& d, RngStream& rng) {
  if (!(t > 0)) throw std::invalid_argument("sample_matrix: t must be > 0");
  if (N < 1 || N > d.size()) throw std::invalid_argument("sample_matrix: N outside [1, drifts]");
  const double sd = std::sqrt(t);
  const double off = std::sqrt(0.5 * t);
  HermitianMatrix h{std::size_t(N)};
  for (int j = 0; j < N; ++j) {
    h.set(std::size_t(j), std::size_t(j), d.mu(j + 1) * t + sd * rng.normal());
    for (int k = j + 1; k < N; ++k) {
      const double re = off * rng.normal();
      const double im = off * rng.normal();
      h.set(std::size_t(j), std::size_t(k), Complex(re, im));
    }
  }
  return h;
}

/// Ascending eigenvalues of every leading n×n minor, n = 1..N.
inline GTPattern minor_eigenvalues(const HermitianMatrix& h) {
  const int N = int(h.order());
  GTPattern p(N);
  for (int n = 1; n <= N; ++n) {
    const EigenResult e = eigh(h.leading_minor(std::size_t(n)));
    for (int k = 1; k <= n; ++k) p(n, k) = e.values[std::size_t(k - 1)];
  }
  if (!interlaces(p, kInterlacingSlack)) throw std::logic_error("minor_eigenvalues: interlacing violated beyond slack");
  return p;
}

inline std::vector<GTPattern> simulate_matrix(int N, double t, const DriftSpec& d, std::uint64_t seed,
                                              std::size_t replicas, int workers = 0) {
  return map_replicas(replicas, resolve_workers(workers), [&](std::size_t i) {
    RngStream rng(seed, i);
    return minor_eigenvalues(sample_matrix(N, t, d, rng));
  });
}

}  // namespace gtminor
