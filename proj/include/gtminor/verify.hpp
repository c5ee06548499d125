#pragma once

/**
 * @file verify.hpp
 * @brief Ties the samplers to the kernels: one-point histograms, distances to
 * the kernel diagonal, the exact identity suites, finite-difference PDE checks
 * and the Monte Carlo ladders.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "gt_pattern.hpp"
#include "kernel_ct.hpp"
#include "kernel_dt.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sim_particles.hpp"
#include "sim_warren.hpp"

namespace gtminor {

/// Sup doubles as "max absolute error" for the exact identity suites.
enum class Statistic { L1, Sup, Chi2, Ratio };

inline std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::L1: return "L1";
    case Statistic::Sup: return "sup";
    case Statistic::Chi2: return "chi2";
    case Statistic::Ratio: return "ratio";
  }
  return "?";
}

inline Statistic parse_statistic(const std::string& s) {
  if (s == "L1" || s == "l1") return Statistic::L1;
  if (s == "sup") return Statistic::Sup;
  if (s == "chi2") return Statistic::Chi2;
  if (s == "ratio") return Statistic::Ratio;
  throw std::invalid_argument("unknown statistic '" + s + "' (expected L1, sup, chi2 or ratio)");
}

/// pass ⇔ lower <= value <= threshold (lower defaults to -∞).
struct DistanceReport {
  std::string test;
  Statistic statistic = Statistic::L1;
  double value = 0;
  double threshold = 0;
  bool pass = false;
  std::optional<double> lower;

  static DistanceReport make(std::string test, Statistic s, double value, double threshold) {
    return {std::move(test), s, value, threshold, value <= threshold, std::nullopt};
  }
  static DistanceReport range(std::string test, Statistic s, double value, double lower, double upper) {
    return {std::move(test), s, value, upper, lower <= value && value <= upper, lower};
  }
};

// ---------------------------------------------------------------------------
// Histograms

/// Equal-width edges covering [lo, hi]; the grid is anchored at lo + offset.
inline std::vector<double> make_edges(double lo, double hi, double width, double offset = 0.0) {
  if (!(width > 0) || !(hi > lo)) throw std::invalid_argument("make_edges: need width > 0 and hi > lo");
  const double start = std::floor((lo - offset) / width) * width + offset;
  std::vector<double> e;
  for (long j = 0;; ++j) {
    const double x = start + double(j) * width;
    e.push_back(x);
    if (x >= hi) break;
  }
  return e;
}

/// Default bins: width 0.1√t over the drift range padded by (3 + 2√N)√t.
inline std::vector<double> default_edges(double t, const DriftSpec& d, double offset = 0.0) {
  const auto mu = d.drifts();
  const double pad = (3.0 + 2.0 * std::sqrt(double(d.size()))) * std::sqrt(t);
  const double lo = t * *std::min_element(mu.begin(), mu.end()) - pad;
  const double hi = t * *std::max_element(mu.begin(), mu.end()) + pad;
  return make_edges(lo, hi, 0.1 * std::sqrt(t), offset);
}

struct CorrelationEstimate {
  int level = 0;
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t replicas = 0;
  std::uint64_t outside = 0;  // points that fell outside every bin
  std::vector<double> density_estimate;
  std::vector<double> std_error;

  std::size_t bins() const { return counts.size(); }
  double width(std::size_t b) const { return bin_edges[b + 1] - bin_edges[b]; }
  double centre(std::size_t b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
};

namespace detail {

inline void finish_estimate(CorrelationEstimate& est) {
  const double R = double(est.replicas);
  est.density_estimate.resize(est.bins());
  est.std_error.resize(est.bins());
  for (std::size_t b = 0; b < est.bins(); ++b) {
    const double p = double(est.counts[b]) / R;
    est.density_estimate[b] = p / est.width(b);
    est.std_error[b] = std::sqrt(std::max(p * (1.0 - p), 0.0) / R) / est.width(b);
  }
}

inline std::size_t locate(std::span<const double> edges, double x) {
  // Returns bins() when x is outside [edges.front(), edges.back()).
  if (!(x >= edges.front()) || !(x < edges.back())) return edges.size() - 1;
  return std::size_t(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin()) - 1;
}

}  // namespace detail

/// Histogram of all n points of level n across replicas, normalized to target ρ¹(·, n).
inline CorrelationEstimate estimate_one_point(std::span<const GTPattern> samples, int level, std::vector<double> edges) {
  if (samples.empty()) throw std::invalid_argument("estimate_one_point: empty sample stream");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
    throw std::invalid_argument("estimate_one_point: need at least two ascending edges");
  CorrelationEstimate est;
  est.level = level;
  est.bin_edges = std::move(edges);
  est.counts.assign(est.bin_edges.size() - 1, 0);
  est.replicas = samples.size();
  for (const GTPattern& p : samples) {
    if (level < 1 || level > p.depth()) throw std::out_of_range("estimate_one_point: level outside pattern depth");
    for (double x : p.level(level)) {
      const std::size_t b = detail::locate(est.bin_edges, x);
      if (b < est.counts.size())
        ++est.counts[b];
      else
        ++est.outside;
    }
  }
  detail::finish_estimate(est);
  return est;
}

/// Bin averages (1/w)∫_bin f over every bin, by 10-point Gauss–Legendre.
inline std::vector<double> bin_averages(const std::function<double(double)>& f, std::span<const double> edges) {
  std::vector<double> out(edges.size() - 1);
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double a = edges[b], c = edges[b + 1];
    out[b] = boost::math::quadrature::gauss<double, 10>::integrate(f, a, c) / (c - a);
  }
  return out;
}

/**
 * Distance between a histogram and a reference one-point density ρ whose
 * total mass is `mass` (n for level n). L1 is the total-variation-type sum
 * Σ|ρ̂ - ρ̄|·w plus the mismatch of the mass outside the bins, divided by n.
 */
inline DistanceReport compare_to_density(const CorrelationEstimate& est, std::span<const double> reference_averages,
                                         double mass, double threshold, Statistic stat = Statistic::L1,
                                         std::string test = "one-point") {
  if (reference_averages.size() != est.bins()) throw std::invalid_argument("compare_to_density: bin count mismatch");
  double value = 0;
  switch (stat) {
    case Statistic::L1: {
      double inside_ref = 0, sum = 0;
      for (std::size_t b = 0; b < est.bins(); ++b) {
        sum += std::abs(est.density_estimate[b] - reference_averages[b]) * est.width(b);
        inside_ref += reference_averages[b] * est.width(b);
      }
      const double outside_est = double(est.outside) / double(est.replicas);
      sum += std::abs(outside_est - std::max(0.0, mass - inside_ref));
      value = sum / mass;
      break;
    }
    case Statistic::Sup:
      for (std::size_t b = 0; b < est.bins(); ++b)
        value = std::max(value, std::abs(est.density_estimate[b] - reference_averages[b]));
      break;
    case Statistic::Chi2: {
      // Reduced χ² over bins expecting at least five points.
      std::size_t used = 0;
      for (std::size_t b = 0; b < est.bins(); ++b) {
        const double expected = reference_averages[b] * est.width(b) * double(est.replicas);
        if (expected < 5) continue;
        const double diff = double(est.counts[b]) - expected;
        value += diff * diff / expected;
        ++used;
      }
      value = used ? value / double(used) : 0.0;
      break;
    }
    case Statistic::Ratio:
      throw std::invalid_argument("compare_to_density: ratio is not a histogram statistic");
  }
  return DistanceReport::make(std::move(test), stat, value, threshold);
}

/// Bin-averaged diagonal K_t((x,n),(x,n)).
inline std::vector<double> kernel_bin_averages(double t, int level, const DriftSpec& d, std::span<const double> edges,
                                               const QuadratureOptions& opts = {}) {
  return bin_averages([&](double x) { return kernel(t, {x, level}, {x, level}, d, opts); }, edges);
}

inline DistanceReport compare_to_kernel(const CorrelationEstimate& est, double t, const DriftSpec& d, double threshold,
                                        Statistic stat = Statistic::L1) {
  const auto ref = kernel_bin_averages(t, est.level, d, est.bin_edges);
  return compare_to_density(est, ref, double(est.level), threshold, stat,
                            "level " + std::to_string(est.level) + " vs kernel");
}

/// Per-level L1 distances of a sample stream to the kernel diagonal.
inline std::vector<double> level_distances(std::span<const GTPattern> samples, double t, const DriftSpec& d,
                                           std::span<const double> edges) {
  std::vector<double> out;
  const int N = samples.front().depth();
  for (int n = 1; n <= N; ++n) {
    const auto est = estimate_one_point(samples, n, std::vector<double>(edges.begin(), edges.end()));
    out.push_back(compare_to_kernel(est, t, d, 1.0).value);
  }
  return out;
}

/**
 * Binned two-point function of levels (a, b): counts of pairs (x, y) with x
 * from level a and y from level b (distinct points when a == b), per replica
 * and per unit area. Only meant for N <= 3 and coarse bins.
 */
inline std::vector<double> estimate_two_point(std::span<const GTPattern> samples, int a, int b,
                                              std::span<const double> edges) {
  if (samples.empty()) throw std::invalid_argument("estimate_two_point: empty sample stream");
  if (samples.front().depth() > 3) throw std::invalid_argument("estimate_two_point: only implemented for N <= 3");
  const std::size_t B = edges.size() - 1;
  std::vector<double> grid(B * B, 0.0);
  for (const GTPattern& p : samples) {
    const auto la = p.level(a);
    const auto lb = p.level(b);
    for (std::size_t i = 0; i < la.size(); ++i)
      for (std::size_t j = 0; j < lb.size(); ++j) {
        if (a == b && i == j) continue;
        const std::size_t u = detail::locate(edges, la[i]), v = detail::locate(edges, lb[j]);
        if (u < B && v < B) grid[u * B + v] += 1.0;
      }
  }
  for (std::size_t u = 0; u < B; ++u)
    for (std::size_t v = 0; v < B; ++v)
      grid[u * B + v] /= double(samples.size()) * (edges[u + 1] - edges[u]) * (edges[v + 1] - edges[v]);
  return grid;
}

// ---------------------------------------------------------------------------
// Random inputs for the identity suites

/// Drifts uniform on [lo, hi] with pairwise gaps at least min_gap (rejection sampling).
inline DriftSpec random_drifts(int N, RngStream& rng, double lo = -2.0, double hi = 2.0, double min_gap = 0.1) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<double> mu(static_cast<std::size_t>(N));
    for (double& m : mu) m = lo + (hi - lo) * rng.uniform();
    if (detail::min_separation(mu) >= min_gap) return DriftSpec(std::move(mu));
  }
  throw std::runtime_error("random_drifts: could not meet the separation constraint");
}

inline RateSpec random_rates(int N, RngStream& rng, double lo = 0.5, double hi = 2.0, double min_gap = 0.1) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<double> v(static_cast<std::size_t>(N));
    for (double& x : v) x = lo + (hi - lo) * rng.uniform();
    if (detail::min_separation(v) >= min_gap) return RateSpec(std::move(v));
  }
  throw std::runtime_error("random_rates: could not meet the separation constraint");
}

/**
 * Random interlacing pattern: top level uniform on [centre - half, centre + half]
 * with gaps at least min_gap, lower levels drawn inside their interlacing
 * intervals keeping min_gap from both ends.
 */
inline GTPattern random_pattern(int N, RngStream& rng, double centre, double half, double min_gap = 0.0) {
  GTPattern p(N);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    std::vector<double> top(static_cast<std::size_t>(N));
    for (double& x : top) x = centre - half + 2.0 * half * rng.uniform();
    std::sort(top.begin(), top.end());
    for (int k = 1; k <= N; ++k) p(N, k) = top[std::size_t(k - 1)];
    for (int n = N - 1; n >= 1; --n)
      for (int k = 1; k <= n; ++k) p(n, k) = p(n + 1, k) + (p(n + 1, k + 1) - p(n + 1, k)) * rng.uniform();
    bool ok = true;
    for (int n = 1; n < N && ok; ++n)
      for (int k = 1; k <= n; ++k)
        if (p(n, k) - p(n + 1, k) < min_gap || p(n + 1, k + 1) - p(n, k) < min_gap) ok = false;
    if (ok) return p;
  }
  throw std::runtime_error("random_pattern: rejection sampling failed");
}

// ---------------------------------------------------------------------------
// Exact identities

namespace detail {

inline double real_line_radius(double t, const DriftSpec& d) {
  double m = 0;
  for (double mu : d.drifts()) m = std::max(m, std::abs(mu));
  return std::max(t * m, 1.0) + 12.0 * std::sqrt(t);
}

}  // namespace detail

/// max_{k,ℓ<=n} |∫ Ψ^{n,t}_{n-k} Φ^{n,t}_{n-ℓ} dx - δ_{kℓ}|.
inline double biorthogonality_error(int n, double t, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  const double R = detail::real_line_radius(t, d);
  double worst = 0;
  for (int k = 1; k <= n; ++k)
    for (int l = 1; l <= n; ++l) {
      auto f = [&](double x) { return psi(n, k, t, x, d, opts) * phi_cap(n, l, t, x, d); };
      const double v = integrate_real(f, -R, R);
      worst = std::max(worst, std::abs(v - (k == l ? 1.0 : 0.0)));
    }
  return worst;
}

/// max_k |∫ φ_n(x,y) Ψ^{n,t}_{n-k}(y) dy - Ψ^{n-1,t}_{n-1-k}(x)| over k = 1..n.
inline double convolution_error(int n, double t, double x, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  if (n < 2) throw std::invalid_argument("convolution_error: needs n >= 2");
  const double R = detail::real_line_radius(t, d);
  double worst = 0;
  for (int k = 1; k <= n; ++k) {
    auto f = [&](double y) { return phi_step(n, x, y, d) * psi(n, k, t, y, d, opts); };
    const double lhs = integrate_real(f, std::min(x, -R), x);
    worst = std::max(worst, std::abs(lhs - psi(n - 1, k, t, x, d, opts)));
  }
  return worst;
}

/// (φ_{n+1} ∗ φ^{(n+1,n')})(x, y): one convolution step by real-line quadrature.
inline double iterated_transition(int n, int n2, double x, double y, const DriftSpec& d) {
  if (n2 <= n) return 0.0;
  if (n2 == n + 1) return phi_step(n2, x, y, d);
  if (!(x > y)) return 0.0;
  auto f = [&](double z) { return phi_step(n + 1, x, z, d) * phi_transition(n + 1, n2, z, y, d); };
  return integrate_real(f, y, x);
}

inline double semigroup_error(int n, int n2, double x, double y, const DriftSpec& d) {
  return std::abs(iterated_transition(n, n2, x, y, d) - phi_transition(n, n2, x, y, d));
}

/**
 * M_{kℓ} = ∫ e^{μ_k y} Ψ^{k,t}_{k-ℓ}(y) dy for k >= ℓ (numerical). Above the
 * diagonal that integral need not converge; the analytic continuation
 * (-1)^{ℓ-k} e^{tμ_k²/2}/∏_{j=k+1}^{ℓ}(μ_k-μ_j) is filled in instead.
 */
inline Matrix normalization_matrix(double t, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  const int N = d.size();
  const double R = detail::real_line_radius(t, d);
  Matrix M{std::size_t(N), std::size_t(N)};
  for (int k = 1; k <= N; ++k)
    for (int l = 1; l <= N; ++l) {
      const double mk = d.mu(k);
      if (k >= l) {
        auto f = [&](double y) { return std::exp(mk * y) * psi(k, l, t, y, d, opts); };
        M(k - 1, l - 1) = integrate_real(f, -R, R);
      } else {
        double denom = 1.0;
        for (int j = k + 1; j <= l; ++j) denom *= (mk - d.mu(j));
        M(k - 1, l - 1) = detail::sign_pow(l - k) * std::exp(0.5 * t * mk * mk) / denom;
      }
    }
  return M;
}

struct NormalizationCheck {
  double max_below_diagonal = 0;  // max |M_{kℓ}|, k > ℓ
  double max_diagonal_error = 0;  // max |M_kk - e^{tμ_k²/2}|
  double det_relative_error = 0;  // |det M / ∏ e^{tμ²/2} - 1|
};

inline NormalizationCheck check_normalization(double t, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  const Matrix M = normalization_matrix(t, d, opts);
  NormalizationCheck c;
  double expected_det = 1.0;
  for (int k = 1; k <= d.size(); ++k) {
    const double diag = std::exp(0.5 * t * d.mu(k) * d.mu(k));
    expected_det *= diag;
    c.max_diagonal_error = std::max(c.max_diagonal_error, std::abs(M(k - 1, k - 1) - diag));
    for (int l = 1; l < k; ++l) c.max_below_diagonal = std::max(c.max_below_diagonal, std::abs(M(k - 1, l - 1)));
  }
  c.det_relative_error = std::abs(det_real(M) / expected_det - 1.0);
  return c;
}

/**
 * max relative error between det[K] at the N(N+1)/2 points of a pattern and
 * the joint density. The full pattern has exactly one point per site, so the
 * determinant already is the density (the labelled correlation function
 * m!·ρ^{(m)} of the symmetrised measure).
 */
inline double full_pattern_identity(double t, const DriftSpec& d, std::span<const GTPattern> patterns,
                                    const QuadratureOptions& opts = {}) {
  double worst = 0;
  for (const GTPattern& p : patterns) {
    const auto pts = pattern_points(p);
    const double lhs = correlation(t, pts, d, opts);
    const double rhs = density_full_pattern(t, p, d);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
  }
  return worst;
}

/// Closed-form Φ coefficients: Φ^{n,t}_{n-ℓ}(x) = Σ_i C_{ℓi} e^{μ_i x}.
inline Matrix closed_form_phi_coefficients(int n, double t, const DriftSpec& d) {
  Matrix C{std::size_t(n), std::size_t(n)};
  for (int l = 1; l <= n; ++l)
    for (int i = l; i <= n; ++i) {
      double denom = 1.0;
      for (int j = l; j <= n; ++j)
        if (j != i) denom *= (d.mu(i) - d.mu(j));
      C(l - 1, i - 1) = detail::sign_pow(n - l) * std::exp(-0.5 * t * d.mu(i) * d.mu(i)) / denom;
    }
  return C;
}

class IllConditioned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Re-derives Φ from Ψ alone: G_{ki} = ∫ e^{μ_i x} Ψ^{n,t}_{n-k}(x) dx over the
 * span basis {e^{μ_i x}}, and the coefficients C with Σ_i C_{ℓi} G_{ki} = δ_{kℓ}
 * are C = (Gᵀ)⁻¹.
 */
inline Matrix biorthogonalize_numerically(int n, double t, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  const double R = detail::real_line_radius(t, d);
  Matrix G{std::size_t(n), std::size_t(n)};
  for (int k = 1; k <= n; ++k)
    for (int i = 1; i <= n; ++i) {
      auto f = [&](double x) { return std::exp(d.mu(i) * x) * psi(n, k, t, x, d, opts); };
      G(k - 1, i - 1) = integrate_real(f, -R, R);
    }
  const Matrix Gt = G.transposed();
  const Matrix C = inverse(Gt);
  const double cond = Gt.norm1() * C.norm1();
  if (!(cond <= 1e12)) throw IllConditioned("biorthogonalize_numerically: Gram matrix condition " + std::to_string(cond));
  return C;
}

/// max_{k,ℓ<=n} |Σ_x Ψ̃ Φ̃ - δ| over a lattice window, doubled until stable.
inline double discrete_biorthogonality_error(int n, double t, const RateSpec& r, const QuadratureOptions& opts = {}) {
  auto sweep = [&](LatticeWindow w) {
    std::vector<double> sums(std::size_t(n * n), 0.0);
    for (long x = w.lo; x <= w.hi; ++x) {
      std::vector<double> ps(static_cast<std::size_t>(n)), ph(static_cast<std::size_t>(n));
      for (int k = 1; k <= n; ++k) ps[std::size_t(k - 1)] = psi_d(n, k, t, x, r, t, opts);
      for (int l = 1; l <= n; ++l) ph[std::size_t(l - 1)] = phi_cap_d(n, l, t, x, r, t);
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) sums[std::size_t(k * n + l)] += ps[std::size_t(k)] * ph[std::size_t(l)];
    }
    return sums;
  };
  auto first = sweep(summation_window(t, r));
  auto second = sweep(summation_window(t, r, 2.0));
  double worst = 0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const double v = second[std::size_t(k * n + l)];
      // A window that is still moving the sum is reported as an error, not hidden.
      const double drift = std::abs(v - first[std::size_t(k * n + l)]);
      worst = std::max(worst, std::abs(v - (k == l ? 1.0 : 0.0)) + drift);
    }
  return worst;
}

/// |Σ_x K̃_t((x,n),(x,n)) - n| over the lattice window.
inline double discrete_level_mass_error(int n, double t, const RateSpec& r, const QuadratureOptions& opts = {}) {
  const LatticeWindow w = summation_window(t, r, 2.0);
  double sum = 0;
  for (long x = w.lo; x <= w.hi; ++x) sum += kernel_d(t, {x, n}, {x, n}, r, opts);
  return std::abs(sum - n);
}

// ---------------------------------------------------------------------------
// Fokker–Planck and boundary identities

namespace detail {

inline double density_at(double t, const GTPattern& p, const DriftSpec& d) { return density_full_pattern(t, p, d); }

}  // namespace detail

/**
 * max over the grid of |∂_t p - ½Δp + Σ_n μ_n Σ_k ∂_{x^n_k} p| with central
 * differences of step h in t and every coordinate. `operator_drifts`
 * replaces μ in the operator only (for power checks).
 */
inline double fokker_planck_residual(double t, std::span<const GTPattern> grid, double h, const DriftSpec& d,
                                     const std::optional<DriftSpec>& operator_drifts = std::nullopt) {
  if (!(h > 0) || !(t > h)) throw std::invalid_argument("fokker_planck_residual: need 0 < h < t");
  const DriftSpec& op = operator_drifts ? *operator_drifts : d;
  double worst = 0;
  for (const GTPattern& p : grid) {
    const double centre = detail::density_at(t, p, d);
    const double dt = (detail::density_at(t + h, p, d) - detail::density_at(t - h, p, d)) / (2.0 * h);
    double lap = 0, transport = 0;
    GTPattern q = p;
    for (int n = 1; n <= p.depth(); ++n)
      for (int k = 1; k <= n; ++k) {
        const double x0 = p(n, k);
        q(n, k) = x0 + h;
        const double up = detail::density_at(t, q, d);
        q(n, k) = x0 - h;
        const double down = detail::density_at(t, q, d);
        q(n, k) = x0;
        lap += (up - 2.0 * centre + down) / (h * h);
        transport += op.mu(n) * (up - down) / (2.0 * h);
      }
    worst = std::max(worst, std::abs(dt - 0.5 * lap + transport));
  }
  return worst;
}

/**
 * max |∂ log p̃/∂x^n_k - (μ_n - μ_{n+1})| over levels n < N, by central
 * differences of step h. The identity holds at every interior point, so
 * configurations next to the walls x^n_k = x^{n+1}_k, x^{n+1}_{k+1} are
 * checked at distance > h from them.
 */
inline double boundary_condition_check(double t, std::span<const GTPattern> configs, const DriftSpec& d,
                                       double h = 1e-4) {
  double worst = 0;
  for (const GTPattern& p : configs) {
    GTPattern q = p;
    for (int n = 1; n < p.depth(); ++n)
      for (int k = 1; k <= n; ++k) {
        const double x0 = p(n, k);
        q(n, k) = x0 + h;
        const double up = std::log(detail::density_at(t, q, d));
        q(n, k) = x0 - h;
        const double down = std::log(detail::density_at(t, q, d));
        q(n, k) = x0;
        worst = std::max(worst, std::abs((up - down) / (2.0 * h) - (d.mu(n) - d.mu(n + 1))));
      }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Monte Carlo ladders

struct LadderRow {
  double parameter = 0;             // Δ for the Warren ladder, T for the scaling study
  std::vector<double> distances;    // per level
  double max_distance = 0;
  double clamp_fraction = 0;        // Warren only
};

/**
 * Warren scheme at every Δ in `deltas` on coupled Brownian paths, compared
 * with the kernel diagonal at t_end. Rows follow the order of `deltas`.
 */
inline std::vector<LadderRow> convergence_ladder(int N, double t_end, std::span<const double> deltas, const DriftSpec& d,
                                                 std::uint64_t seed, std::size_t replicas, int workers = 0) {
  if (replicas == 0 || deltas.empty()) return {};
  const auto runs = map_replicas(replicas, resolve_workers(workers), [&](std::size_t i) {
    RngStream rng(seed, i);
    return simulate_warren_coupled(N, t_end, deltas, d, rng);
  });
  const auto edges = default_edges(t_end, d);
  std::vector<LadderRow> rows;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    std::vector<GTPattern> samples;
    samples.reserve(replicas);
    std::uint64_t events = 0, checks = 0;
    for (const auto& r : runs) {
      samples.push_back(r[j].pattern);
      events += r[j].clamp_events;
      checks += r[j].clamp_checks;
    }
    LadderRow row;
    row.parameter = deltas[j];
    row.distances = level_distances(samples, t_end, d, edges);
    row.max_distance = *std::max_element(row.distances.begin(), row.distances.end());
    row.clamp_fraction = checks ? double(events) / double(checks) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

/**
 * Particle system at rates v_n = 1 - μ_n/√T run to τT, rescaled to
 * λ = (τT - x)/√T and compared with the kernel at time τ. Bin edges sit
 * half a lattice spacing (of the largest T) off the lattice.
 */
inline std::vector<LadderRow> scaling_study(double tau, std::span<const double> Ts, const DriftSpec& d,
                                            std::uint64_t seed, std::size_t replicas, int workers = 0) {
  if (replicas == 0 || Ts.empty()) return {};
  const double T_max = *std::max_element(Ts.begin(), Ts.end());
  const auto edges = default_edges(tau, d, 0.5 / std::sqrt(T_max));
  std::vector<LadderRow> rows;
  for (double T : Ts) {
    const RateSpec r = RateSpec::from_drifts(d, T);
    const auto runs = simulate_particles(d.size(), tau * T, r, seed, replicas, workers);
    std::vector<GTPattern> samples;
    samples.reserve(runs.size());
    for (const auto& s : runs) samples.push_back(rescale_pattern(s, tau, T));
    LadderRow row;
    row.parameter = T;
    row.distances = level_distances(samples, tau, d, edges);
    row.max_distance = *std::max_element(row.distances.begin(), row.distances.end());
    rows.push_back(std::move(row));
  }
  return rows;
}

/// True when every value is at most (1 + slack) times its predecessor.
inline bool non_increasing(std::span<const double> values, double slack = 0.1) {
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > (1.0 + slack) * values[i - 1]) return false;
  return true;
}

}  // namespace gtminor
