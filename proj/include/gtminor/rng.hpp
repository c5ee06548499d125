#pragma once

/**
 * @file rng.hpp
 * @brief Per-replica random streams. A stream is a function of
 * (master_seed, replica_index) only, so results never depend on which worker
 * ran the replica.
 */

#include <cmath>
#include <cstdint>
#include <random>

namespace gtminor {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

inline constexpr std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t replica_index) {
  return detail::splitmix64(detail::splitmix64(master_seed) ^ detail::splitmix64(replica_index + 0x632be59bd9b4e019ULL));
}

/**
 * mt19937_64 engine with hand-written transforms. The standard distribution
 * classes are implementation-defined, which would break cross-platform
 * reproducibility of the sample files.
 */
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replica_index)
      : master_seed_(master_seed), replica_index_(replica_index), engine_(stream_seed(master_seed, replica_index)) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t replica_index() const { return replica_index_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (double(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal by the Marsaglia polar method; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uint64_t(uniform() * double(n)) % n; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t replica_index_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gtminor
