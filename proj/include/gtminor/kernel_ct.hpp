#pragma once

/**
 * @file kernel_ct.hpp
 * @brief Fixed-time correlation kernel of the drifted GUE minor process and
 * the joint densities it is built from.
 *
 * Notation (levels are 1-based, drifts μ_1..μ_N):
 *
 *   Ψ^{n,t}_{n-k}(x) = (-1)^{n-k}/(2πi) ∫_{iℝ+a} e^{tz²/2 - xz} ∏_{j=k+1}^{n}(z-μ_j) dz,
 *     where for k > n the product is read as 1/∏_{j=n+1}^{k}(z-μ_j) and the
 *     line passes to the left of those poles;
 *   Φ^{n,t}_{n-ℓ}(x) = (-1)^{n-ℓ}/(2πi) ∮ e^{-tw²/2 + xw} / ∏_{j=ℓ}^{n}(w-μ_j) dw;
 *   φ^{(n,n')}(x,y)  = Σ_{i=n+1}^{n'} e^{μ_i(y-x)} ∏_{j≠i} 1/(μ_j-μ_i) · 1[x>y];
 *   K_t((x,n),(y,n')) = -φ^{(n,n')}(x,y) + Σ_{k=1}^{n'} Ψ^{n,t}_{n-k}(x) Φ^{n',t}_{n'-k}(y).
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gt_pattern.hpp"
#include "numerics.hpp"

namespace gtminor {

/// Closed residue sums need at least this pairwise separation.
inline constexpr double kConfluenceThreshold = 1e-6;
/// Perturbation step for the confluent fallback (μ_j -> μ_j + j·ε).
inline constexpr double kPerturbationStep = 1e-4;

class ConfluenceError : public std::domain_error {
 public:
  ConfluenceError(const std::string& what, double separation) : std::domain_error(what), separation_(separation) {}
  double separation() const { return separation_; }

 private:
  double separation_;
};

namespace detail {

inline double min_separation(std::span<const double> v) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) best = std::min(best, std::abs(v[i] - v[j]));
  return best;
}

// Two-point Richardson extrapolation for an O(ε) perturbation error.
template <class F>
double richardson(F&& f, double eps) {
  return 2.0 * f(eps) - f(2.0 * eps);
}

}  // namespace detail

/// Drift vector μ_1..μ_N with its contour abscissa and minimal pairwise gap.
class DriftSpec {
 public:
  explicit DriftSpec(std::vector<double> drifts) : mu_(std::move(drifts)) {
    validate();
    abscissa_ = *std::min_element(mu_.begin(), mu_.end()) - 1.0;
  }

  DriftSpec(std::vector<double> drifts, double contour_abscissa) : mu_(std::move(drifts)), abscissa_(contour_abscissa) {
    validate();
    if (!(abscissa_ < *std::min_element(mu_.begin(), mu_.end())))
      throw std::invalid_argument("DriftSpec: contour abscissa must lie left of every drift");
  }

  int size() const { return int(mu_.size()); }
  double mu(int n) const { return mu_.at(std::size_t(n - 1)); }
  std::span<const double> drifts() const { return mu_; }
  double contour_abscissa() const { return abscissa_; }
  double separation() const { return separation_; }

  /// Minimal gap among μ_from..μ_to (infinite for fewer than two drifts).
  double separation(int from, int to) const {
    if (from < 1 || to > size() || from > to) return std::numeric_limits<double>::infinity();
    return detail::min_separation(std::span<const double>(mu_).subspan(std::size_t(from - 1), std::size_t(to - from + 1)));
  }

  DriftSpec perturbed(double eps) const {
    std::vector<double> m = mu_;
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += double(j + 1) * eps;
    return DriftSpec(std::move(m));
  }

 private:
  void validate() {
    if (mu_.empty()) throw std::invalid_argument("DriftSpec: need at least one drift");
    for (double m : mu_) detail::require_finite(m, "DriftSpec");
    separation_ = detail::min_separation(mu_);
  }

  std::vector<double> mu_;
  double abscissa_ = 0;
  double separation_ = 0;
};

struct KernelPoint {
  double x;
  int n;
};

namespace detail {

inline void check_level(int n, const DriftSpec& d, int lowest, const char* where) {
  if (n < lowest || n > d.size())
    throw std::out_of_range(std::string(where) + ": level " + std::to_string(n) + " outside [" +
                            std::to_string(lowest) + ", " + std::to_string(d.size()) + "]");
}

inline void check_time(double t, const char* where) {
  if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument(std::string(where) + ": t must be > 0");
}

inline void check_separation(const DriftSpec& d, int from, int to, const char* where) {
  const double sep = d.separation(from, to);
  if (sep < kConfluenceThreshold)
    throw ConfluenceError(std::string(where) + ": drifts closer than the confluence threshold", sep);
}

inline double sign_pow(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

/**
 * Ψ^{n,t}_{n-k}(x) by trapezoid quadrature on a vertical line. For k <= n the
 * integrand is entire and the line goes through the saddle x/t, where the
 * Gaussian factor is real and positive. For k > n the line must stay left
 * of the poles μ_{n+1..k}, so the abscissa is min(x/t, μ_-).
 */
inline double psi(int n, int k, double t, double x, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  detail::check_time(t, "psi");
  detail::check_level(n, d, 0, "psi");
  if (k < 0 || k > d.size()) throw std::out_of_range("psi: k outside [0, N]");
  detail::require_finite(x, "psi");

  const bool entire = k <= n;
  const int lo = entire ? k + 1 : n + 1;
  const int hi = entire ? n : k;
  const double a = entire ? x / t : std::min(x / t, d.contour_abscissa());

  std::vector<double> roots;
  roots.reserve(std::size_t(std::max(0, hi - lo + 1)));
  for (int j = lo; j <= hi; ++j) roots.push_back(d.mu(j));
  std::vector<double> scales;
  if (entire)
    for (double r : roots) scales.push_back(a - r);

  const double sign = detail::sign_pow(n - k);
  auto integrand = [&](Complex z) {
    Complex factor = 1.0;
    for (double r : roots) factor *= (z - r);
    if (!entire) factor = 1.0 / factor;
    return std::exp(0.5 * t * z * z - x * z) * factor;
  };
  const VerticalLineContour line(a, gaussian_half_extent(t, opts.tol, scales), 32);
  return sign * integrate_vertical(integrand, line, opts).real();
}

/**
 * Quadrature-free Ψ for k <= n through the Gaussian-moment polynomials:
 * Ψ^{n,t}_{n-k}(x) = e^{-x²/2t}/√(2πt) · t^{-(n-k)/2} · p_{n-k}((μ_{k+1}t-x)/√t, ..., (μ_n t-x)/√t).
 */
inline double psi_hermite(int n, int k, double t, double x, const DriftSpec& d) {
  detail::check_time(t, "psi_hermite");
  detail::check_level(n, d, 1, "psi_hermite");
  if (k < 0 || k > n) throw std::out_of_range("psi_hermite: requires 0 <= k <= n");
  const double st = std::sqrt(t);
  std::vector<double> args;
  for (int j = k + 1; j <= n; ++j) args.push_back((d.mu(j) * t - x) / st);
  return normal_pdf(x, 0.0, t) * std::pow(t, -0.5 * (n - k)) * sym_poly_p(args);
}

/// Φ^{n,t}_{n-ℓ}(x) as the residue sum over μ_ℓ..μ_n.
inline double phi_cap(int n, int l, double t, double x, const DriftSpec& d) {
  detail::check_level(n, d, 1, "phi_cap");
  if (l < 1 || l > n) throw std::out_of_range("phi_cap: requires 1 <= l <= n");
  if (!(t >= 0)) throw std::invalid_argument("phi_cap: t must be >= 0");
  detail::check_separation(d, l, n, "phi_cap");
  double sum = 0;
  for (int i = l; i <= n; ++i) {
    const double mi = d.mu(i);
    double denom = 1.0;
    for (int j = l; j <= n; ++j)
      if (j != i) denom *= (mi - d.mu(j));
    sum += std::exp(-0.5 * t * mi * mi + x * mi) / denom;
  }
  return detail::sign_pow(n - l) * sum;
}

/// Φ^{n,t}_{n-ℓ}(x) by trapezoid quadrature on a circle around μ_ℓ..μ_n.
inline double phi_cap_contour(int n, int l, double t, double x, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  detail::check_level(n, d, 1, "phi_cap_contour");
  if (l < 1 || l > n) throw std::out_of_range("phi_cap_contour: requires 1 <= l <= n");
  double lo = d.mu(l), hi = d.mu(l);
  for (int j = l; j <= n; ++j) {
    lo = std::min(lo, d.mu(j));
    hi = std::max(hi, d.mu(j));
  }
  auto integrand = [&](Complex w) {
    Complex denom = 1.0;
    for (int j = l; j <= n; ++j) denom *= (w - d.mu(j));
    return std::exp(-0.5 * t * w * w + x * w) / denom;
  };
  const CircleContour circle(0.5 * (lo + hi), 0.5 * (hi - lo) + 1.0, 64);
  return detail::sign_pow(n - l) * integrate_circle(integrand, circle, opts).real();
}

/// One-level transition φ_n(x,y) = e^{μ_n(y-x)} 1[x > y].
inline double phi_step(int n, double x, double y, const DriftSpec& d) {
  detail::check_level(n, d, 1, "phi_step");
  return x > y ? std::exp(d.mu(n) * (y - x)) : 0.0;
}

/// φ^{(n,n')}(x,y): zero for n' <= n, φ_{n'} for n' = n+1, residue sum otherwise.
inline double phi_transition(int n, int n2, double x, double y, const DriftSpec& d) {
  if (n2 <= n) return 0.0;
  detail::check_level(n, d, 0, "phi_transition");
  detail::check_level(n2, d, 1, "phi_transition");
  if (n2 == n + 1) return phi_step(n2, x, y, d);
  detail::check_separation(d, n + 1, n2, "phi_transition");
  if (!(x > y)) return 0.0;
  double sum = 0;
  for (int i = n + 1; i <= n2; ++i) {
    double denom = 1.0;
    for (int j = n + 1; j <= n2; ++j)
      if (j != i) denom *= (d.mu(j) - d.mu(i));
    sum += std::exp(d.mu(i) * (y - x)) / denom;
  }
  return sum;
}

/**
 * φ^{(n,n')} from its line integral (-1)^{n'-n}/(2πi)∫ e^{z(y-x)}/∏(z-μ_j) dz.
 * The integrand only decays algebraically along a vertical line, so the line
 * is bent into the parabola z = a + is ± βs² (towards the side where
 * e^{z(y-x)} decays). No pole is crossed: the parabola meets the real axis only at a.
 */
inline double phi_transition_contour(int n, int n2, double x, double y, const DriftSpec& d,
                                     const QuadratureOptions& opts = {}) {
  if (n2 <= n) return 0.0;
  if (n2 == n + 1) return phi_step(n2, x, y, d);
  const double gap = x - y;
  if (gap == 0.0) throw std::invalid_argument("phi_transition_contour: x == y is not supported");
  const double a = d.contour_abscissa();
  const double bend = gap > 0 ? 1.0 : -1.0;
  const double beta = 1.0;
  auto path = [=](double s) {
    return std::pair<Complex, Complex>{Complex(a + bend * beta * s * s, s), Complex(2.0 * bend * beta * s, 1.0)};
  };
  auto integrand = [&](Complex z) {
    Complex denom = 1.0;
    for (int j = n + 1; j <= n2; ++j) denom *= (z - d.mu(j));
    return std::exp(-z * gap) / denom;
  };
  // e^{-|gap| β s²} must fall below tol/100 at the ends.
  const double half = std::sqrt(std::log(100.0 / opts.tol) / (std::abs(gap) * beta)) + 1.0;
  return detail::sign_pow(n2 - n) * integrate_path(integrand, path, half, 64, opts).real();
}

namespace detail {

inline double kernel_direct(double t, KernelPoint a, KernelPoint b, const DriftSpec& d, const QuadratureOptions& opts) {
  double value = -phi_transition(a.n, b.n, a.x, b.x, d);
  for (int k = 1; k <= b.n; ++k) value += psi(a.n, k, t, a.x, d, opts) * phi_cap(b.n, k, t, b.x, d);
  return value;
}

}  // namespace detail

/**
 * K_t((x,n),(x',n')). Drifts closer than the confluence threshold are
 * handled by evaluating at μ_j + j·ε and μ_j + 2j·ε and extrapolating.
 */
inline double kernel(double t, KernelPoint a, KernelPoint b, const DriftSpec& d, const QuadratureOptions& opts = {}) {
  detail::check_time(t, "kernel");
  detail::check_level(a.n, d, 1, "kernel");
  detail::check_level(b.n, d, 1, "kernel");
  const int top = std::max(a.n, b.n);
  if (d.separation(1, top) < kConfluenceThreshold) {
    return detail::richardson(
        [&](double eps) { return detail::kernel_direct(t, a, b, d.perturbed(eps), opts); }, kPerturbationStep);
  }
  return detail::kernel_direct(t, a, b, d, opts);
}

/// m-point correlation function det[K_t(p_i, p_j)].
inline double correlation(double t, std::span<const KernelPoint> points, const DriftSpec& d,
                          const QuadratureOptions& opts = {}) {
  if (points.empty()) throw std::invalid_argument("correlation: need at least one point");
  const std::size_t m = points.size();
  Matrix k(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) k(i, j) = kernel(t, points[i], points[j], d, opts);
  return det_real(std::move(k));
}

/// All N(N+1)/2 points of a pattern, level by level.
inline std::vector<KernelPoint> pattern_points(const GTPattern& p) {
  std::vector<KernelPoint> pts;
  pts.reserve(p.size());
  for (int n = 1; n <= p.depth(); ++n)
    for (int k = 1; k <= n; ++k) pts.push_back({p(n, k), n});
  return pts;
}

/**
 * Normalized joint density of the whole pattern,
 * det[Ψ^{N,t}_{N-k}(λ^N_ℓ)] ∏ e^{-tμ_n²/2} ∏_n det[φ_n(λ^{n-1}_i, λ^n_j)],
 * with the virtual row φ_n(virt, y) = e^{μ_n y}. Zero off the GT cone.
 * Every Ψ here has k <= N, so the quadrature-free form is used; the result
 * is smooth enough to be finite-differenced.
 */
inline double density_full_pattern(double t, const GTPattern& lambda, const DriftSpec& d) {
  detail::check_time(t, "density_full_pattern");
  const int N = d.size();
  if (lambda.depth() != N) throw std::invalid_argument("density_full_pattern: pattern depth must equal N");
  if (!interlaces(lambda)) return 0.0;

  Matrix top{std::size_t(N), std::size_t(N)};
  for (int k = 1; k <= N; ++k)
    for (int l = 1; l <= N; ++l) top(k - 1, l - 1) = psi_hermite(N, k, t, lambda(N, l), d);
  double value = det_real(std::move(top));

  for (int n = 1; n <= N; ++n) value *= std::exp(-0.5 * t * d.mu(n) * d.mu(n));

  for (int n = 1; n <= N; ++n) {
    Matrix phi{std::size_t(n), std::size_t(n)};
    for (int j = 1; j <= n; ++j) {
      for (int i = 1; i < n; ++i) phi(i - 1, j - 1) = phi_step(n, lambda(n - 1, i), lambda(n, j), d);
      phi(n - 1, j - 1) = std::exp(d.mu(n) * lambda(n, j));
    }
    value *= det_real(std::move(phi));
  }
  return value;
}

/**
 * Top-level eigenvalue density C · det[e^{-(λ_i - tμ_j)²/2t}] Δ(λ)/Δ(μ), with
 * Δ(x) = ∏_{i<j}(x_j - x_i). The constant C is fixed numerically on
 * construction: by Andréief's identity the chamber integral equals
 * det[∫ λ^{k-1} e^{-(λ-tμ_j)²/2t} dλ]/Δ(μ), a determinant of 1-D integrals.
 */
class TopLevelDensity {
 public:
  TopLevelDensity(double t, DriftSpec drifts) : t_(t), d_(std::move(drifts)) {
    detail::check_time(t, "TopLevelDensity");
    if (d_.separation() < kConfluenceThreshold)
      throw ConfluenceError("TopLevelDensity: drifts must be distinct", d_.separation());
    const int N = d_.size();
    Matrix moments{std::size_t(N), std::size_t(N)};
    const double width = 40.0 * std::sqrt(t_);
    for (int j = 1; j <= N; ++j) {
      const double centre = t_ * d_.mu(j);
      for (int k = 1; k <= N; ++k) {
        auto f = [&](double x) { return std::pow(x, k - 1) * std::exp(-(x - centre) * (x - centre) / (2.0 * t_)); };
        moments(j - 1, k - 1) = integrate_real(f, centre - width, centre + width);
      }
    }
    normalization_ = vandermonde(d_.drifts()) / det_real(std::move(moments));
  }

  double normalization() const { return normalization_; }

  /// Symmetric in its arguments; read it as a density on the ordered chamber.
  double operator()(std::span<const double> lambda) const {
    const int N = d_.size();
    if (int(lambda.size()) != N) throw std::invalid_argument("TopLevelDensity: wrong number of eigenvalues");
    Matrix g{std::size_t(N), std::size_t(N)};
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const double dx = lambda[std::size_t(i)] - t_ * d_.mu(j + 1);
        g(std::size_t(i), std::size_t(j)) = std::exp(-dx * dx / (2.0 * t_));
      }
    return normalization_ * det_real(std::move(g)) * vandermonde(lambda) / vandermonde(d_.drifts());
  }

  static double vandermonde(std::span<const double> x) {
    double v = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i + 1; j < x.size(); ++j) v *= (x[j] - x[i]);
    return v;
  }

 private:
  double t_;
  DriftSpec d_;
  double normalization_ = 0;
};

inline double density_top_level(double t, std::span<const double> lambda, const DriftSpec& d) {
  return TopLevelDensity(t, d)(lambda);
}

}  // namespace gtminor
