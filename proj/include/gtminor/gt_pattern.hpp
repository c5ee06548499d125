#pragma once

/**
 * @file gt_pattern.hpp
 * @brief Triangular interlaced arrays x^n_k, 1 <= k <= n <= N, stored flat
 * level by level.
 *
 * Continuous patterns interlace weakly, x^{n+1}_k <= x^n_k <= x^{n+1}_{k+1}.
 * Discrete (integer) patterns use the strict-weak variant
 * x^{n+1}_k < x^n_k <= x^{n+1}_{k+1}.
 */

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gtminor {

inline constexpr std::size_t triangle_size(int n) { return std::size_t(n) * std::size_t(n + 1) / 2; }

template <class T>
class BasicGTPattern {
 public:
  using value_type = T;

  BasicGTPattern() = default;
  explicit BasicGTPattern(int depth, T fill = T{}) : depth_(depth), values_(triangle_size(depth), fill) {
    if (depth < 1) throw std::invalid_argument("GT pattern depth must be >= 1");
  }

  /// Builds from jagged levels; level n must hold exactly n entries.
  static BasicGTPattern from_levels(const std::vector<std::vector<T>>& levels) {
    BasicGTPattern p(int(levels.size()));
    for (int n = 1; n <= p.depth_; ++n) {
      if (levels[n - 1].size() != std::size_t(n))
        throw std::invalid_argument("GT pattern level " + std::to_string(n) + " must hold " + std::to_string(n) +
                                    " entries");
      for (int k = 1; k <= n; ++k) p(n, k) = levels[n - 1][k - 1];
    }
    return p;
  }

  int depth() const { return depth_; }
  std::size_t size() const { return values_.size(); }

  static std::size_t index(int n, int k) { return triangle_size(n - 1) + std::size_t(k - 1); }

  T& operator()(int n, int k) { return values_[index(n, k)]; }
  const T& operator()(int n, int k) const { return values_[index(n, k)]; }

  std::span<T> level(int n) { return {values_.data() + triangle_size(n - 1), std::size_t(n)}; }
  std::span<const T> level(int n) const { return {values_.data() + triangle_size(n - 1), std::size_t(n)}; }

  std::span<const T> flat() const { return values_; }
  std::span<T> flat() { return values_; }

  bool operator==(const BasicGTPattern&) const = default;

 private:
  int depth_ = 0;
  std::vector<T> values_;
};

using GTPattern = BasicGTPattern<double>;

/// Integer pattern plus the simulation clock of the particle system.
struct DiscreteGTPattern {
  BasicGTPattern<long> positions;
  double time = 0.0;

  int depth() const { return positions.depth(); }
  long& operator()(int n, int k) { return positions(n, k); }
  long operator()(int n, int k) const { return positions(n, k); }
  bool operator==(const DiscreteGTPattern&) const = default;
};

/// Weak interlacing, tolerating `slack` of round-off on every inequality.
inline bool interlaces(const GTPattern& p, double slack = 0.0) {
  for (int n = 1; n < p.depth(); ++n)
    for (int k = 1; k <= n; ++k) {
      if (p(n + 1, k) > p(n, k) + slack) return false;
      if (p(n, k) > p(n + 1, k + 1) + slack) return false;
    }
  for (int n = 1; n <= p.depth(); ++n)
    for (int k = 1; k < n; ++k)
      if (p(n, k) > p(n, k + 1) + slack) return false;
  return true;
}

/// Strict-weak discrete interlacing x^{n+1}_k < x^n_k <= x^{n+1}_{k+1}.
inline bool interlaces(const BasicGTPattern<long>& p) {
  for (int n = 1; n < p.depth(); ++n)
    for (int k = 1; k <= n; ++k) {
      if (!(p(n + 1, k) < p(n, k))) return false;
      if (!(p(n, k) <= p(n + 1, k + 1))) return false;
    }
  return true;
}

inline bool interlaces(const DiscreteGTPattern& p) { return interlaces(p.positions); }

}  // namespace gtminor
