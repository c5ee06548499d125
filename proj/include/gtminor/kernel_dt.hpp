#pragma once

/**
 * @file kernel_dt.hpp
 * @brief Correlation kernel of the block/push particle system at a fixed time
 * and its diffusive rescaling.
 *
 * With jump rates v_1..v_N and packed initial data:
 *
 *   Ψ̃^{n,t}_{n-k}(x) = 1/(2πi) ∮_{Γ_{0,v}} e^{tz} z^{-(x+n+1)} ∏_{j=k+1}^{n}(z-v_j) dz
 *     (for k > n the product becomes 1/∏_{j=n+1}^{k}(z-v_j));
 *   Φ̃^{n,t}_{n-ℓ}(x) = Σ_{i=ℓ}^{n} v_i^{x+n} e^{-tv_i} / ∏_{j≠i}(v_i-v_j);
 *   φ̃^{(n,n')}(x,y)  = Σ_{i=n+1}^{n'} v_i^{(y-x)+(n'-n)-1} / ∏_{j≠i}(v_i-v_j) · 1[y>=x];
 *   K̃_t((x,n),(y,n')) = -φ̃^{(n,n')}(x,y) + Σ_{k=1}^{n'} Ψ̃^{n,t}_{n-k}(x) Φ̃^{n',t}_{n'-k}(y).
 *
 * The indicator in φ̃ is inclusive: the two-step convolution
 * Σ_z v_a^{z-x} v_b^{y-z} over x <= z <= y equals 1 at y = x.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernel_ct.hpp"
#include "numerics.hpp"

namespace gtminor {

/// Jump rates v_1..v_N, optionally derived from drifts as v_n = 1 - μ_n/√T.
class RateSpec {
 public:
  struct Derivation {
    std::vector<double> drifts;
    double scale;  // T
  };

  explicit RateSpec(std::vector<double> rates) : v_(std::move(rates)) { validate(); }

  static RateSpec from_drifts(const DriftSpec& d, double T) {
    if (!(T > 0)) throw std::invalid_argument("RateSpec: scaling parameter T must be > 0");
    std::vector<double> v;
    const double root = std::sqrt(T);
    for (double m : d.drifts()) v.push_back(1.0 - m / root);
    RateSpec r(std::move(v));
    r.derivation_ = Derivation{std::vector<double>(d.drifts().begin(), d.drifts().end()), T};
    return r;
  }

  int size() const { return int(v_.size()); }
  double v(int n) const { return v_.at(std::size_t(n - 1)); }
  std::span<const double> rates() const { return v_; }
  double separation() const { return separation_; }
  double max_rate() const { return *std::max_element(v_.begin(), v_.end()); }
  const std::optional<Derivation>& derivation() const { return derivation_; }

  double separation(int from, int to) const {
    if (from < 1 || to > size() || from > to) return std::numeric_limits<double>::infinity();
    return detail::min_separation(std::span<const double>(v_).subspan(std::size_t(from - 1), std::size_t(to - from + 1)));
  }

  RateSpec perturbed(double eps) const {
    std::vector<double> w = v_;
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += double(j + 1) * eps;
    return RateSpec(std::move(w));
  }

 private:
  void validate() {
    if (v_.empty()) throw std::invalid_argument("RateSpec: need at least one rate");
    for (double r : v_) {
      detail::require_finite(r, "RateSpec");
      if (!(r > 0)) throw std::invalid_argument("RateSpec: rates must be > 0 (T too small for these drifts?)");
    }
    separation_ = detail::min_separation(v_);
  }

  std::vector<double> v_;
  double separation_ = 0;
  std::optional<Derivation> derivation_;
};

struct DiscretePoint {
  long x;
  int n;
};

namespace detail {

inline void check_level(int n, const RateSpec& r, int lowest, const char* where) {
  if (n < lowest || n > r.size())
    throw std::out_of_range(std::string(where) + ": level " + std::to_string(n) + " outside [" +
                            std::to_string(lowest) + ", " + std::to_string(r.size()) + "]");
}

inline void check_separation(const RateSpec& r, int from, int to, const char* where) {
  const double sep = r.separation(from, to);
  if (sep < kConfluenceThreshold) throw ConfluenceError(std::string(where) + ": rates closer than the confluence threshold", sep);
}

}  // namespace detail

/**
 * Ψ̃^{n,t}_{n-k}(x)·e^{-log_scale}. The circle is centred at 0 and passes
 * through the saddle m/t of e^{tz}z^{-m} (m = x+n+1) unless it must widen to
 * enclose the rates. The integrand is evaluated as exp(tz - m log z - shift)
 * so that large t and x do not overflow.
 */
inline double psi_d(int n, int k, double t, long x, const RateSpec& r, double log_scale = 0.0,
                    const QuadratureOptions& opts = {}) {
  if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("psi_d: t must be > 0");
  detail::check_level(n, r, 0, "psi_d");
  if (k < 0 || k > r.size()) throw std::out_of_range("psi_d: k outside [0, N]");

  const bool entire = k <= n;
  const double m = double(x) + n + 1;
  // No pole at 0 and no rate poles: the integrand is entire.
  if (entire && m <= 0) return 0.0;

  const int lo = entire ? k + 1 : n + 1;
  const int hi = entire ? n : k;
  std::vector<double> roots;
  for (int j = lo; j <= hi; ++j) roots.push_back(r.v(j));

  double radius = std::max(m, 0.0) / t;
  if (!entire) radius = std::max(radius, r.max_rate() + 1.0 / std::sqrt(std::max(t, 1.0)));
  if (radius <= 0) radius = 1.0;
  const double shift = t * radius - m * std::log(radius);

  auto integrand = [&](Complex z) {
    Complex factor = 1.0;
    for (double v : roots) factor *= (z - v);
    if (!entire) factor = 1.0 / factor;
    return std::exp(t * z - m * std::log(z) - shift) * factor;
  };
  // Angular width of the saddle is about 1/√m; start with enough nodes to see it.
  int nodes = 64;
  while (nodes < 8.0 * std::sqrt(std::max(m, 1.0)) && nodes < (1 << 20)) nodes *= 2;
  const CircleContour circle(0.0, radius, nodes);
  return integrate_circle(integrand, circle, opts).real() * std::exp(shift - log_scale);
}

/// Φ̃^{n,t}_{n-ℓ}(x)·e^{log_scale} as the residue sum over v_ℓ..v_n.
inline double phi_cap_d(int n, int l, double t, long x, const RateSpec& r, double log_scale = 0.0) {
  detail::check_level(n, r, 1, "phi_cap_d");
  if (l < 1 || l > n) throw std::out_of_range("phi_cap_d: requires 1 <= l <= n");
  if (!(t >= 0)) throw std::invalid_argument("phi_cap_d: t must be >= 0");
  detail::check_separation(r, l, n, "phi_cap_d");
  double sum = 0;
  for (int i = l; i <= n; ++i) {
    const double vi = r.v(i);
    double denom = 1.0;
    for (int j = l; j <= n; ++j)
      if (j != i) denom *= (vi - r.v(j));
    sum += std::exp(double(x + n) * std::log(vi) - t * vi + log_scale) / denom;
  }
  return sum;
}

/// Φ̃ by quadrature on a circle enclosing only the rates v_ℓ..v_n.
inline double phi_cap_d_contour(int n, int l, double t, long x, const RateSpec& r, const QuadratureOptions& opts = {}) {
  detail::check_level(n, r, 1, "phi_cap_d_contour");
  if (l < 1 || l > n) throw std::out_of_range("phi_cap_d_contour: requires 1 <= l <= n");
  double lo = r.v(l), hi = r.v(l);
  for (int j = l; j <= n; ++j) {
    lo = std::min(lo, r.v(j));
    hi = std::max(hi, r.v(j));
  }
  const double centre = 0.5 * (lo + hi);
  // Stay clear of the branch point at 0 for negative powers.
  const double radius = 0.5 * (hi - lo) + 0.5 * lo;
  auto integrand = [&](Complex w) {
    Complex denom = 1.0;
    for (int j = l; j <= n; ++j) denom *= (w - r.v(j));
    return std::pow(w, double(x + n)) * std::exp(-t * w) / denom;
  };
  return integrate_circle(integrand, CircleContour(centre, radius, 64), opts).real();
}

/// φ̃^{(n,n')}(x,y): zero for n' <= n, v_{n'}^{y-x} 1[y>=x] for one step, residue sum otherwise.
inline double phi_transition_d(int n, int n2, long x, long y, const RateSpec& r) {
  if (n2 <= n) return 0.0;
  detail::check_level(n, r, 0, "phi_transition_d");
  detail::check_level(n2, r, 1, "phi_transition_d");
  if (n2 > n + 1) detail::check_separation(r, n + 1, n2, "phi_transition_d");
  if (y < x) return 0.0;
  if (n2 == n + 1) return std::pow(r.v(n2), double(y - x));
  const double power = double(y - x) + double(n2 - n) - 1.0;
  double sum = 0;
  for (int i = n + 1; i <= n2; ++i) {
    const double vi = r.v(i);
    double denom = 1.0;
    for (int j = n + 1; j <= n2; ++j)
      if (j != i) denom *= (vi - r.v(j));
    sum += std::pow(vi, power) / denom;
  }
  return sum;
}

/**
 * φ̃^{(n,n')} from (1/2πi)∮ z^{(y-x)+(n'-n)-1}/∏_{j=n+1}^{n'}(z-v_j) dz over a
 * circle enclosing 0 and every rate. The generating function of one step is
 * Σ_{d>=0} v^d z^{-d} = z/(z-v); for y < x the integrand decays like z^{-2}.
 */
inline double phi_transition_d_contour(int n, int n2, long x, long y, const RateSpec& r,
                                       const QuadratureOptions& opts = {}) {
  if (n2 <= n) return 0.0;
  double top = 0;
  for (int j = n + 1; j <= n2; ++j) top = std::max(top, r.v(j));
  const double power = double(y - x) + double(n2 - n) - 1.0;
  auto integrand = [&](Complex z) {
    Complex denom = 1.0;
    for (int j = n + 1; j <= n2; ++j) denom *= (z - r.v(j));
    return std::pow(z, power) / denom;
  };
  return integrate_circle(integrand, CircleContour(0.0, top + 1.0, 64), opts).real();
}

namespace detail {

inline double kernel_d_direct(double t, DiscretePoint a, DiscretePoint b, const RateSpec& r, double log_scale,
                              const QuadratureOptions& opts) {
  double value = -phi_transition_d(a.n, b.n, a.x, b.x, r);
  for (int k = 1; k <= b.n; ++k)
    value += psi_d(a.n, k, t, a.x, r, log_scale, opts) * phi_cap_d(b.n, k, t, b.x, r, log_scale);
  return value;
}

}  // namespace detail

/// K̃_t((x,n),(y,n')); confluent rates take the same perturbation path as the continuous kernel.
inline double kernel_d(double t, DiscretePoint a, DiscretePoint b, const RateSpec& r, const QuadratureOptions& opts = {}) {
  if (!(t > 0)) throw std::invalid_argument("kernel_d: t must be > 0");
  detail::check_level(a.n, r, 1, "kernel_d");
  detail::check_level(b.n, r, 1, "kernel_d");
  // e^{±t} balances the two factors of each product term.
  const double log_scale = t;
  if (r.separation(1, std::max(a.n, b.n)) < kConfluenceThreshold) {
    return detail::richardson(
        [&](double eps) { return detail::kernel_d_direct(t, a, b, r.perturbed(eps), log_scale, opts); },
        kPerturbationStep);
  }
  return detail::kernel_d_direct(t, a, b, r, log_scale, opts);
}

/// Lattice site ⌊τT - ξ√T⌋ associated with the macroscopic coordinate ξ.
inline long lattice_site(double tau, double T, double xi) { return long(std::floor(tau * T - xi * std::sqrt(T))); }

/// Macroscopic coordinate λ = (τT - x)/√T of a lattice position.
inline double macroscopic(double tau, double T, long x) { return (tau * T - double(x)) / std::sqrt(T); }

namespace detail {

// Each term of the rescaled kernel carries T^{(n-n'+1)/2}; the split below
// keeps every factor O(1) as T grows.
inline double rescaled_direct(double tau, double T, KernelPoint a, KernelPoint b, const RateSpec& r,
                              const QuadratureOptions& opts) {
  const double t = tau * T;
  const long X = lattice_site(tau, T, a.x);
  const long Y = lattice_site(tau, T, b.x);
  const double half_log_T = 0.5 * std::log(T);
  double value = -phi_transition_d(a.n, b.n, X, Y, r) * std::exp(-half_log_T * (b.n - a.n - 1));
  for (int k = 1; k <= b.n; ++k) {
    const double left = psi_d(a.n, k, t, X, r, t - half_log_T * (a.n - k + 1), opts);
    const double right = phi_cap_d(b.n, k, t, Y, r, t - half_log_T * (b.n - k));
    value += left * right;
  }
  return value;
}

}  // namespace detail

/**
 * √T·T^{(n-n')/2}·K̃_{τT}((⌊τT-ξ√T⌋,n),(⌊τT-ξ'√T⌋,n')) at rates v_j = 1 - μ_j/√T;
 * converges to kernel(τ, (ξ,n), (ξ',n'), μ).
 */
inline double rescaled_kernel(double tau, double T, KernelPoint a, KernelPoint b, const DriftSpec& d,
                              const QuadratureOptions& opts = {}) {
  if (!(tau > 0) || !(T > 0)) throw std::invalid_argument("rescaled_kernel: τ and T must be > 0");
  const RateSpec r = RateSpec::from_drifts(d, T);
  detail::check_level(a.n, r, 1, "rescaled_kernel");
  detail::check_level(b.n, r, 1, "rescaled_kernel");
  if (r.separation(1, std::max(a.n, b.n)) < kConfluenceThreshold) {
    return detail::richardson(
        [&](double eps) { return detail::rescaled_direct(tau, T, a, b, r.perturbed(eps), opts); }, kPerturbationStep);
  }
  return detail::rescaled_direct(tau, T, a, b, r, opts);
}

/**
 * Summation window for ℤ-sums of products Ψ̃·Φ̃ at time t: centred at the
 * propagator mode, half-width 12√(max(t,1)·N). The lower end never goes
 * below -N-1, where every Ψ̃ with k <= n vanishes.
 */
struct LatticeWindow {
  long lo;
  long hi;
};

inline LatticeWindow summation_window(double t, const RateSpec& r, double widen = 1.0) {
  const double centre = t * r.max_rate();
  const double half = widen * 12.0 * std::sqrt(std::max(t, 1.0) * r.size());
  return {std::max(long(-r.size() - 1), long(std::floor(centre - half))), long(std::ceil(centre + half))};
}

}  // namespace gtminor
