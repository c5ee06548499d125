// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "gtminor/gtminor.hpp"
#include "gtminor/io.hpp"
#include "oracles.hpp"

using namespace gtminor;

namespace {

constexpr std::uint64_t kSeed = 20240601;
const DriftSpec kThree({-1.0, 0.0, 1.0});

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

template <class F>
void criterion(int id, const char* name, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<DriftSpec> identity_drifts() {
  RngStream rng(kSeed, 1);
  std::vector<DriftSpec> out;
  for (int i = 0; i < 20; ++i) out.push_back(random_drifts(6, rng));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt("%.4f", x);
  return s;
}

}  // namespace

int main() {
  const auto drifts = identity_drifts();
  const double times[] = {0.5, 1.0, 2.0};

  criterion(1, "biorthogonality, 20 drift vectors of length 6, t in {0.5,1,2}, n <= 6", [&]() -> Outcome {
    constexpr double tol = 1e-7;
    double worst = 0;
    for (const auto& d : drifts)
      for (double t : times)
        for (int n = 1; n <= 6; ++n) worst = std::max(worst, biorthogonality_error(n, t, d));
    return {worst < tol, fmt("max |sum - delta| = %.3e", worst) + fmt(" < %.0e", tol)};
  });

  criterion(2, "convolution and semigroup identities", [&]() -> Outcome {
    constexpr double tol = 1e-6;
    double conv = 0, semi = 0;
    for (const auto& d : drifts) {
      for (double t : times)
        for (int n = 2; n <= 6; ++n)
          for (double x : {-1.2, 0.3, 1.9}) conv = std::max(conv, convolution_error(n, t, x, d));
      for (int n = 0; n <= 4; ++n)
        for (int n2 = n + 2; n2 <= std::min(n + 3, 6); ++n2)
          for (auto [x, y] : {std::pair{1.0, -0.5}, std::pair{0.2, -1.3}, std::pair{2.5, 2.4}})
            semi = std::max(semi, semigroup_error(n, n2, x, y, d));
    }
    return {conv < tol && semi < tol, fmt("convolution %.3e", conv) + fmt(", semigroup %.3e", semi) + fmt(" < %.0e", tol)};
  });

  criterion(3, "normalization matrix: upper triangular, diagonal exp(t mu^2/2), determinant", [&]() -> Outcome {
    constexpr double tol_below = 1e-8, tol_diag = 1e-9, tol_det = 1e-8;
    double below = 0, diag = 0, det = 0;
    for (const auto& d : drifts)
      for (double t : times) {
        const auto c = check_normalization(t, d);
        below = std::max(below, c.max_below_diagonal);
        diag = std::max(diag, c.max_diagonal_error);
        det = std::max(det, c.det_relative_error);
      }
    return {below < tol_below && diag < tol_diag && det < tol_det,
            fmt("below-diagonal %.3e", below) + fmt(" < %.0e", tol_below) + fmt(", diagonal %.3e", diag) +
                fmt(" < %.0e", tol_diag) + fmt(", det relative %.3e", det) + fmt(" < %.0e", tol_det)};
  });

  criterion(4, "full-pattern correlation equals joint density, N=2, 50 patterns", [&]() -> Outcome {
    constexpr double tol = 1e-6;
    const DriftSpec d({-1.0, 1.0});
    RngStream rng(kSeed, 4);
    std::vector<GTPattern> ps;
    for (int i = 0; i < 50; ++i) ps.push_back(random_pattern(2, rng, 0.0, 2.5, 0.02));
    const double worst = full_pattern_identity(1.0, d, ps);
    return {worst < tol, fmt("max relative error %.3e", worst) + fmt(" < %.0e", tol)};
  });

  criterion(5, "single level: Gaussian (161-point grid) and Poisson", [&]() -> Outcome {
    constexpr double tol = 1e-8;
    const double mu = 0.6, t = 1.7;
    const DriftSpec d({mu});
    double cont = 0;
    for (int i = 0; i <= 160; ++i) {
      const double x = mu * t + std::sqrt(t) * (-4.0 + 0.05 * i);
      cont = std::max(cont, std::abs(kernel(t, {x, 1}, {x, 1}, d) - oracle::normal_density(x, mu * t, t)));
    }
    const RateSpec r({1.3});
    double disc = 0;
    for (long x = -1; x <= 30; ++x)
      disc = std::max(disc, std::abs(kernel_d(2.5, {x, 1}, {x, 1}, r) - oracle::poisson_pmf(x + 1, 1.3 * 2.5)));
    return {cont < tol && disc < tol, fmt("continuous %.3e", cont) + fmt(", discrete %.3e", disc) + fmt(" < %.0e", tol)};
  });

  criterion(6, "matrix minors vs kernel, N=3, 1e5 replicas, L1 per level", [&]() -> Outcome {
    constexpr double tol = 0.03;
    const auto samples = simulate_matrix(3, 1.0, kThree, kSeed, 100000);
    const auto dist = level_distances(samples, 1.0, kThree, default_edges(1.0, kThree));
    const double worst = *std::max_element(dist.begin(), dist.end());
    return {worst < tol, "L1 = [" + join(dist) + "]" + fmt(" < %.2f", tol)};
  });

  criterion(7, "Warren ladder dt in {1e-2,1e-3,1e-4}, 1e5 replicas", [&]() -> Outcome {
    constexpr double tol = 0.05, slack = 0.1;
    const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    const auto rows = convergence_ladder(3, 1.0, deltas, kThree, kSeed, 100000);
    std::vector<double> dist;
    for (const auto& r : rows) dist.push_back(r.max_distance);
    const bool ok = dist.back() < tol && non_increasing(dist, slack);
    return {ok, "max L1 per dt = [" + join(dist) + "], clamp fraction at 1e-4 = " + fmt("%.4f", rows.back().clamp_fraction) +
                    fmt("; final < %.2f", tol) + fmt(", non-increasing within %.0f%%", slack * 100)};
  });

  criterion(8, "particle scaling limit, T in {100,400,1600}, 1e5 replicas", [&]() -> Outcome {
    constexpr double tol = 0.05, slack = 0.1;
    const std::vector<double> Ts{100.0, 400.0, 1600.0};
    const auto rows = scaling_study(1.0, Ts, kThree, kSeed, 100000);
    std::vector<double> dist;
    for (const auto& r : rows) dist.push_back(r.max_distance);
    // Pointwise: every ordered pair of five probe points, error decreasing along the T ladder.
    const double xi[] = {-1.0, -0.4, 0.0, 0.5, 1.2};
    int decreasing = 0, pairs = 0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const KernelPoint a{xi[i], 1 + i % 3}, b{xi[j], 1 + j % 3};
        const double target = kernel(1.0, a, b, kThree);
        double prev = std::numeric_limits<double>::infinity();
        bool dec = true;
        for (double T : Ts) {
          const double err = std::abs(rescaled_kernel(1.0, T, a, b, kThree) - target);
          dec = dec && err < prev;
          prev = err;
        }
        decreasing += dec;
        ++pairs;
      }
    const bool ok = dist.back() < tol && non_increasing(dist, slack) && decreasing == pairs;
    return {ok, "max L1 per T = [" + join(dist) + "]" + fmt("; final < %.2f", tol) +
                    "; pointwise kernel error decreasing at " + std::to_string(decreasing) + "/" + std::to_string(pairs) +
                    " point pairs"};
  });

  criterion(9, "Fokker-Planck residual O(h^2) and boundary identity", [&]() -> Outcome {
    RngStream rng(kSeed, 9);
    std::vector<GTPattern> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(random_pattern(3, rng, 0.0, 2.0, 0.05));
    const double coarse = fokker_planck_residual(1.0, grid, 1e-2, kThree);
    const double fine = fokker_planck_residual(1.0, grid, 1e-3, kThree);
    const double ratio = coarse / fine;
    const double boundary = boundary_condition_check(1.0, grid, kThree);
    const bool ok = ratio >= 30.0 && ratio <= 300.0 && boundary < 1e-6;
    return {ok, fmt("residual ratio h=1e-2/1e-3 = %.1f in [30, 300]", ratio) + fmt("; boundary %.3e < 1e-06", boundary)};
  });

  criterion(10, "discrete biorthogonality, N <= 4, t <= 5", [&]() -> Outcome {
    constexpr double tol = 1e-8;
    RngStream rng(kSeed, 10);
    double worst = 0;
    for (int rep = 0; rep < 5; ++rep)
      for (int N = 1; N <= 4; ++N) {
        const RateSpec r = random_rates(N, rng);
        for (double t : {0.5, 1.0, 2.5, 5.0}) worst = std::max(worst, discrete_biorthogonality_error(N, t, r));
      }
    return {worst < tol, fmt("max |sum - delta| = %.3e", worst) + fmt(" < %.0e", tol)};
  });

  criterion(11, "determinism across 1, 4 and 16 workers", [&]() -> Outcome {
    const RateSpec r = RateSpec::from_drifts(kThree, 100.0);
    const auto particles = [&](int w) { return patterns_csv(simulate_particles(3, 100.0, r, kSeed, 2000, w)); };
    const auto matrix = [&](int w) { return patterns_csv(simulate_matrix(3, 1.0, kThree, kSeed, 2000, w)); };
    const auto warren = [&](int w) { return patterns_csv(simulate_warren_replicas(3, 1.0, 1e-3, kThree, kSeed, 500, w)); };
    bool ok = true;
    const std::string p1 = particles(1), m1 = matrix(1), w1 = warren(1);
    for (int w : {4, 16}) ok = ok && particles(w) == p1 && matrix(w) == m1 && warren(w) == w1;
    return {ok, ok ? "particle, matrix and Warren CSVs byte-identical" : "outputs differ"};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
