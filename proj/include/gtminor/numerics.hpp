#pragma once

/**
 * @file numerics.hpp
 * @brief Shared numerical kernels: contour quadrature, Gaussian-moment
 * symmetric polynomials, a small Hermitian eigensolver and dense
 * determinants.
 *
 * Contour integrals are always normalized as (1/2πi)∮ f(z) dz. Both the
 * vertical-line and circle rules are trapezoidal with node doubling; for the
 * analytic, rapidly decaying integrands used in this library the trapezoid
 * rule converges geometrically, so the doubling loop normally stops after
 * one or two refinements.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gtminor {

using Complex = std::complex<double>;

inline constexpr double kDefaultTolerance = 1e-10;

struct QuadratureOptions {
  double tol = kDefaultTolerance;  // relative change between doublings
  int max_doublings = 16;
};

/// Raised when node doubling does not settle; carries the last two estimates.
class QuadratureFailure : public std::runtime_error {
 public:
  QuadratureFailure(const std::string& what, Complex previous, Complex last)
      : std::runtime_error(what), previous_(previous), last_(last) {}
  Complex previous() const { return previous_; }
  Complex last() const { return last_; }

 private:
  Complex previous_;
  Complex last_;
};

class EigenFailure : public std::runtime_error {
 public:
  EigenFailure(const std::string& what, int sweeps, double off_norm)
      : std::runtime_error(what), sweeps_(sweeps), off_norm_(off_norm) {}
  int sweeps() const { return sweeps_; }
  double off_norm() const { return off_norm_; }

 private:
  int sweeps_;
  double off_norm_;
};

namespace detail {

inline void require_finite(Complex z, const char* where) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument(std::string(where) + ": non-finite value");
}

inline void require_finite(double x, const char* where) {
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(where) + ": non-finite value");
}

// Absolute change considered converged once it sits at the round-off level
// of the summed magnitudes.
inline bool settled(Complex prev, Complex next, double mass, double tol) {
  const double diff = std::abs(next - prev);
  return diff <= tol * std::abs(next) || diff <= 64.0 * std::numeric_limits<double>::epsilon() * mass;
}

}  // namespace detail

/// Line Re z = abscissa, truncated to Im z ∈ [-half_extent, half_extent].
struct VerticalLineContour {
  double abscissa;
  double half_extent;
  int node_count;  // initial number of trapezoid intervals

  VerticalLineContour(double abscissa_, double half_extent_, int node_count_ = 32)
      : abscissa(abscissa_), half_extent(half_extent_), node_count(node_count_) {
    detail::require_finite(abscissa, "VerticalLineContour");
    detail::require_finite(half_extent, "VerticalLineContour");
    if (!(half_extent > 0)) throw std::invalid_argument("VerticalLineContour: half_extent must be > 0");
    if (node_count < 2) throw std::invalid_argument("VerticalLineContour: node_count must be >= 2");
  }
};

/// Positively oriented circle |w - center| = radius.
struct CircleContour {
  Complex center;
  double radius;
  int node_count;

  CircleContour(Complex center_, double radius_, int node_count_ = 64)
      : center(center_), radius(radius_), node_count(node_count_) {
    detail::require_finite(center, "CircleContour");
    detail::require_finite(radius, "CircleContour");
    if (!(radius > 0)) throw std::invalid_argument("CircleContour: radius must be > 0");
    if (node_count < 2 || (node_count & (node_count - 1)) != 0)
      throw std::invalid_argument("CircleContour: node_count must be a power of two");
  }
};

/**
 * Half-extent S such that e^{-t S^2/2} times the polynomial growth
 * ∏(1 + S/scale_j) drops below tol/100. `scales` are the distances from the
 * line to the polynomial's roots (clamped below at 1).
 */
inline double gaussian_half_extent(double t, double tol, std::span<const double> scales = {}) {
  if (!(t > 0)) throw std::invalid_argument("gaussian_half_extent: t must be > 0");
  const double target = std::log(100.0 / tol);
  double s = std::sqrt(2.0 * target / t);
  for (int it = 0; it < 50; ++it) {
    double growth = 0;
    for (double c : scales) growth += std::log1p(s / std::max(1.0, std::abs(c)));
    const double next = std::sqrt(2.0 * (target + growth) / t);
    if (std::abs(next - s) < 1e-12 * s) return next;
    s = next;
  }
  return s;
}

/**
 * (1/2πi)∫ f(z) dz along a path z(s), s ∈ [-S, S], by the trapezoid rule
 * with node doubling. `path` returns {z(s), z'(s)}.
 */
template <class F, class Path>
Complex integrate_path(F&& f, Path&& path, double half_extent, int intervals, const QuadratureOptions& opts = {}) {
  const double inv_2pi = 0.5 / std::numbers::pi;
  auto term = [&](double s, double& mass) {
    const auto [z, dz] = path(s);
    const Complex v = f(z) * dz;
    detail::require_finite(v, "integrate_path: integrand");
    mass += std::abs(v);
    return v;
  };
  // Integrand is multiplied by dz/ds, so (1/2πi)∫ = (1/2πi)·h·Σ.
  const Complex to_value = Complex(0, -inv_2pi);
  int n = intervals;
  double h = 2.0 * half_extent / n;
  double mass = 0;
  Complex sum = 0.5 * (term(-half_extent, mass) + term(half_extent, mass));
  for (int j = 1; j < n; ++j) sum += term(-half_extent + j * h, mass);
  Complex estimate = to_value * h * sum;
  for (int d = 0; d < opts.max_doublings; ++d) {
    for (int j = 0; j < n; ++j) sum += term(-half_extent + (j + 0.5) * h, mass);
    n *= 2;
    h *= 0.5;
    const Complex next = to_value * h * sum;
    const double scaled_mass = inv_2pi * h * mass;
    if (detail::settled(estimate, next, scaled_mass, opts.tol)) return next;
    if (d + 1 == opts.max_doublings)
      throw QuadratureFailure("integrate_path: node doubling did not converge", estimate, next);
    estimate = next;
  }
  throw QuadratureFailure("integrate_path: no node doubling allowed", estimate, estimate);
}

/**
 * (1/2πi)∫ f(z) dz along the upward line Re z = abscissa. The caller
 * guarantees Gaussian decay so the truncation to [-S, S] is harmless.
 */
template <class F>
Complex integrate_vertical(F&& f, const VerticalLineContour& contour, const QuadratureOptions& opts = {}) {
  const double a = contour.abscissa;
  auto line = [a](double s) { return std::pair<Complex, Complex>{Complex(a, s), Complex(0, 1)}; };
  return integrate_path(std::forward<F>(f), line, contour.half_extent, contour.node_count, opts);
}

/// (1/2πi)∮ f(w) dw over a positively oriented circle; equispaced trapezoid rule.
template <class F>
Complex integrate_circle(F&& f, const CircleContour& contour, const QuadratureOptions& opts = {}) {
  const Complex c = contour.center;
  const double r = contour.radius;
  double mass = 0;
  // dw = i (w - c) dθ, so (1/2πi)∮ f dw = (1/2π)∫ f(w)(w - c) dθ.
  auto term = [&](double theta) {
    const Complex u = std::polar(r, theta);
    const Complex v = f(c + u) * u;
    detail::require_finite(v, "integrate_circle: integrand");
    mass += std::abs(v);
    return v;
  };
  int n = contour.node_count;
  Complex sum = 0;
  for (int j = 0; j < n; ++j) sum += term(2.0 * std::numbers::pi * j / n);
  Complex estimate = sum / double(n);
  for (int d = 0; d < opts.max_doublings; ++d) {
    for (int j = 0; j < n; ++j) sum += term(2.0 * std::numbers::pi * (j + 0.5) / n);
    n *= 2;
    const Complex next = sum / double(n);
    if (detail::settled(estimate, next, mass / n, opts.tol)) return next;
    if (d + 1 == opts.max_doublings)
      throw QuadratureFailure("integrate_circle: node doubling did not converge", estimate, next);
    estimate = next;
  }
  throw QuadratureFailure("integrate_circle: no node doubling allowed", estimate, estimate);
}

/**
 * p_n(x_1..x_n) = ((-1)^n / i√(2π)) ∫_{iℝ} e^{w²/2} ∏(w - x_j) dw, evaluated
 * exactly: with w = is the integral is (-1)^n E[∏(iZ - x_j)] for standard
 * normal Z, and E[(iZ)^{2r}] = (-1)^r (2r-1)!!.
 */
inline double sym_poly_p(std::span<const double> points) {
  const std::size_t n = points.size();
  // coeff[m] = coefficient of w^m in ∏(w - x_j)
  std::vector<double> coeff(n + 1, 0.0);
  coeff[0] = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    detail::require_finite(points[j], "sym_poly_p");
    for (std::size_t m = j + 1; m > 0; --m) coeff[m] = coeff[m - 1] - points[j] * coeff[m];
    coeff[0] = -points[j] * coeff[0];
  }
  double sum = 0;
  double moment = 1.0;  // (-1)^r (2r-1)!!
  for (std::size_t m = 0; m <= n; m += 2) {
    sum += coeff[m] * moment;
    moment *= -double(m + 1);
  }
  return (n % 2 == 0) ? sum : -sum;
}

/// Dense row-major real matrix, just enough for determinants and small solves.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("Matrix: shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double norm1() const {
    double best = 0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// In-place LU with partial pivoting; returns the permutation sign (0 when singular).
inline int lu_decompose(Matrix& a, std::vector<std::size_t>& perm) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("lu_decompose: matrix must be square");
  perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  int sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) return 0;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(perm[k], perm[piv]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return sign;
}

/// Determinant by partially pivoted elimination.
inline double det_real(Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) detail::require_finite(m(i, j), "det_real");
  if (m.rows() == 0) return 1.0;
  std::vector<std::size_t> perm;
  const int sign = lu_decompose(m, perm);
  if (sign == 0) return 0.0;
  double det = sign;
  for (std::size_t i = 0; i < m.rows(); ++i) det *= m(i, i);
  return det;
}

/// Inverse via LU; throws on exact singularity.
inline Matrix inverse(Matrix m) {
  const std::size_t n = m.rows();
  std::vector<std::size_t> perm;
  if (lu_decompose(m, perm) == 0) throw std::domain_error("inverse: singular matrix");
  Matrix inv(n, n);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = (perm[i] == c) ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) col[i] -= m(i, j) * col[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) col[i] -= m(i, j) * col[j];
      col[i] /= m(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = col[i];
  }
  return inv;
}

/// Hermitian matrix; `set` writes both triangles so the invariant cannot break.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(std::size_t order) : n_(order), a_(order * order) {
    if (order == 0) throw std::invalid_argument("HermitianMatrix: order must be positive");
  }

  std::size_t order() const { return n_; }
  Complex operator()(std::size_t j, std::size_t k) const { return a_[j * n_ + k]; }

  void set(std::size_t j, std::size_t k, Complex v) {
    detail::require_finite(v, "HermitianMatrix::set");
    if (j == k) {
      a_[j * n_ + j] = Complex(v.real(), 0.0);
    } else {
      a_[j * n_ + k] = v;
      a_[k * n_ + j] = std::conj(v);
    }
  }

  HermitianMatrix leading_minor(std::size_t m) const {
    if (m == 0 || m > n_) throw std::out_of_range("HermitianMatrix::leading_minor");
    HermitianMatrix h(m);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < m; ++k) h.a_[j * m + k] = a_[j * n_ + k];
    return h;
  }

  double frobenius_norm() const {
    double s = 0;
    for (const auto& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }

 private:
  std::size_t n_;
  std::vector<Complex> a_;
};

struct EigenResult {
  std::vector<double> values;    // ascending
  std::vector<Complex> vectors;  // column-major: vectors[k * n + i] is component i of vector k
  double max_residual = 0;       // max_k ‖H v_k - λ_k v_k‖
  int sweeps = 0;
};

/**
 * Cyclic complex Jacobi. Each rotation first removes the phase of the pivot
 * a_pq with a diagonal unitary and then applies the real symmetric Jacobi
 * rotation to the resulting 2×2 block.
 */
inline EigenResult eigh(const HermitianMatrix& h, int max_sweeps = 60) {
  const std::size_t n = h.order();
  if (n > 64) throw std::invalid_argument("eigh: order must be <= 64");
  std::vector<Complex> a(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) a[j * n + k] = h(j, k);
  std::vector<Complex> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto A = [&](std::size_t j, std::size_t k) -> Complex& { return a[j * n + k]; };

  const double scale = std::max(h.frobenius_norm(), std::numeric_limits<double>::min());
  auto off_norm = [&] {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) s += std::norm(A(j, k));
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = std::abs(A(p, q));
        if (r <= 1e-300) continue;
        const Complex phase = A(p, q) / r;  // e^{iφ}
        const double app = A(p, p).real();
        const double aqq = A(q, q).real();
        const double theta = (aqq - app) / (2.0 * r);
        const double tt = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tt * tt + 1.0);
        const double s = tt * c;
        // U restricted to (p,q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
        const Complex upp = c, upq = s;
        const Complex uqp = -s * std::conj(phase), uqq = c * std::conj(phase);
        for (std::size_t i = 0; i < n; ++i) {  // A <- A U
          const Complex aip = A(i, p), aiq = A(i, q);
          A(i, p) = aip * upp + aiq * uqp;
          A(i, q) = aip * upq + aiq * uqq;
        }
        for (std::size_t j = 0; j < n; ++j) {  // A <- U^* A
          const Complex apj = A(p, j), aqj = A(q, j);
          A(p, j) = std::conj(upp) * apj + std::conj(uqp) * aqj;
          A(q, j) = std::conj(upq) * apj + std::conj(uqq) * aqj;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        A(p, p) = A(p, p).real();
        A(q, q) = A(q, q).real();
        for (std::size_t i = 0; i < n; ++i) {  // V <- V U (row i of V stored as v[i*n + col])
          const Complex vip = v[i * n + p], viq = v[i * n + q];
          v[i * n + p] = vip * upp + viq * uqp;
          v[i * n + q] = vip * upq + viq * uqq;
        }
      }
    }
  }
  const double residual_off = off_norm();
  if (residual_off > 1e-13 * scale)
    throw EigenFailure("eigh: Jacobi sweeps did not converge", sweep, residual_off);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return A(x, x).real() < A(y, y).real(); });

  EigenResult out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = A(src, src).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors[k * n + i] = v[i * n + src];
  }
  for (std::size_t k = 0; k < n; ++k) {
    double res = 0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex acc = -out.values[k] * out.vectors[k * n + i];
      for (std::size_t j = 0; j < n; ++j) acc += h(i, j) * out.vectors[k * n + j];
      res += std::norm(acc);
    }
    out.max_residual = std::max(out.max_residual, std::sqrt(res));
  }
  return out;
}

/**
 * Adaptive Gauss–Kronrod (61 point) on a finite real interval. Used for the
 * real-line integrals in the identity checks, never for contour integrals.
 */
template <class F>
double integrate_real(F&& f, double a, double b, double tol = 1e-13, unsigned max_depth = 18) {
  if (a == b) return 0.0;
  double error = 0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(std::forward<F>(f), a, b, max_depth, tol, &error);
}

/// Gaussian density with mean m and variance var.
inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace gtminor
