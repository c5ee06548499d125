#include <gtest/gtest.h>

#include <cmath>

#include "gtminor/kernel_dt.hpp"
#include "gtminor/verify.hpp"
#include "oracles.hpp"

using namespace gtminor;

namespace {

std::vector<double> rates_of(const RateSpec& r) { return {r.rates().begin(), r.rates().end()}; }

}  // namespace

TEST(RateSpec, Invariants) {
  EXPECT_THROW(RateSpec(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(RateSpec({1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(RateSpec::from_drifts(DriftSpec({2.0}), 1.0), std::invalid_argument);
  const RateSpec r = RateSpec::from_drifts(DriftSpec({-1.0, 1.0}), 100.0);
  EXPECT_DOUBLE_EQ(r.v(1), 1.1);
  EXPECT_DOUBLE_EQ(r.v(2), 0.9);
  ASSERT_TRUE(r.derivation());
  EXPECT_EQ(r.derivation()->scale, 100.0);
}

TEST(PsiD, SingleLevelIsPoissonWeight) {
  const RateSpec r({1.0});
  for (double t : {0.5, 2.0, 7.5})
    for (long x = -1; x <= 12; ++x)
      EXPECT_NEAR(psi_d(1, 1, t, x, r), std::exp(double(x + 1) * std::log(t) - std::lgamma(double(x) + 2.0)),
                  1e-12 * std::max(1.0, std::exp(t)));
}

TEST(PsiD, FarLeftVanishes) {
  const RateSpec r({1.0, 1.5, 0.7});
  EXPECT_EQ(psi_d(2, 1, 1.0, -10, r), 0.0);
  EXPECT_LT(std::abs(psi_d(2, 2, 1.0, -3, r)), 1e-12);
  EXPECT_NEAR(psi_d(1, 1, 1.0, 0, r), 1.0, 1e-13);
}

TEST(PsiD, MatchesResidueSeries) {
  RngStream rng(31, 0);
  for (int rep = 0; rep < 4; ++rep) {
    const RateSpec r = random_rates(5, rng);
    const auto v = rates_of(r);
    for (double t : {0.5, 1.0, 3.0})
      for (int n = 0; n <= 5; ++n)
        for (int k = 0; k <= 5; ++k) {
          if (n == 0 && k == 0) continue;
          for (long x : {-4L, -1L, 0L, 2L, 6L}) {
            const double exact = oracle::psi_d_series(n, k, t, x, v);
            EXPECT_NEAR(psi_d(n, k, t, x, r), exact, 1e-10 * std::max(1.0, std::abs(exact)))
                << n << " " << k << " " << t << " " << x;
          }
        }
  }
}

TEST(PsiD, LogScaleIsAFactor) {
  const RateSpec r({1.0, 1.3});
  const double plain = psi_d(2, 1, 4.0, 3, r);
  EXPECT_NEAR(psi_d(2, 1, 4.0, 3, r, 2.5) * std::exp(2.5), plain, 1e-12 * std::abs(plain));
}

TEST(PhiCapD, SingleTermAndContour) {
  const RateSpec r({1.2});
  EXPECT_NEAR(phi_cap_d(1, 1, 2.0, 3, r), std::pow(1.2, 4.0) * std::exp(-2.4), 1e-14);
  RngStream rng(32, 0);
  for (int rep = 0; rep < 4; ++rep) {
    const RateSpec q = random_rates(5, rng);
    for (int n = 1; n <= 5; ++n)
      for (int l = 1; l <= n; ++l)
        for (long x : {-3L, 0L, 4L}) {
          const double a = phi_cap_d(n, l, 1.5, x, q), b = phi_cap_d_contour(n, l, 1.5, x, q);
          EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a)));
        }
  }
}

TEST(PhiTransitionD, Examples) {
  const RateSpec r({1.0, 2.0, 0.5});
  EXPECT_NEAR(phi_transition_d(0, 2, 0, 0, r), 1.0, 1e-15);
  EXPECT_NEAR(phi_transition_d(0, 2, 0, 1, r), 3.0, 1e-14);
  EXPECT_EQ(phi_transition_d(0, 2, 1, 0, r), 0.0);
  EXPECT_EQ(phi_transition_d(1, 1, 0, 0, r), 0.0);
  EXPECT_NEAR(phi_transition_d(1, 2, 2, 5, r), 8.0, 1e-14);
  EXPECT_NEAR(phi_transition_d(1, 2, 2, 2, r), 1.0, 1e-15);
}

TEST(PhiTransitionD, ConvolutionOfGeometricSteps) {
  // Σ_{y ≤ z ≤ w} v_1^{z-y} v_2^{w-z} by brute force.
  const RateSpec r({0.6, 1.4, 0.9});
  for (long w = 0; w <= 6; ++w) {
    double brute = 0;
    for (long z = 0; z <= w; ++z) brute += std::pow(0.6, double(z)) * std::pow(1.4, double(w - z));
    EXPECT_NEAR(phi_transition_d(0, 2, 0, w, r), brute, 1e-12 * brute);
  }
}

TEST(PhiTransitionD, MatchesContour) {
  RngStream rng(33, 0);
  for (int rep = 0; rep < 4; ++rep) {
    const RateSpec r = random_rates(5, rng);
    for (int n = 0; n <= 3; ++n)
      for (int n2 = n + 1; n2 <= 5; ++n2)
        for (long gap : {-3L, -1L, 0L, 1L, 5L}) {
          const double a = phi_transition_d(n, n2, 0, gap, r), b = phi_transition_d_contour(n, n2, 0, gap, r);
          EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a))) << n << " " << n2 << " " << gap;
        }
  }
}

TEST(KernelD, SingleLevelIsPoisson) {
  const RateSpec r({1.3});
  for (long x = -1; x <= 15; ++x) EXPECT_NEAR(kernel_d(2.5, {x, 1}, {x, 1}, r), oracle::poisson_pmf(x + 1, 3.25), 1e-12);
}

TEST(KernelD, LevelMassEqualsLevel) {
  const RateSpec r({0.8, 1.3, 1.0});
  for (int n = 1; n <= 3; ++n) {
    double mass = 0;
    const auto w = summation_window(2.0, r);
    for (long x = w.lo; x <= w.hi; ++x) mass += kernel_d(2.0, {x, n}, {x, n}, r);
    EXPECT_NEAR(mass, double(n), 1e-8);
  }
}

TEST(KernelD, ConfluentRatesAreFinite) {
  const RateSpec r({1.0, 1.0, 1.0});
  const double k = kernel_d(2.0, {0, 3}, {0, 3}, r);
  const double near = kernel_d(2.0, {0, 3}, {0, 3}, RateSpec({1.0, 1.0 + 1e-3, 1.0 - 1e-3}));
  EXPECT_TRUE(std::isfinite(k));
  EXPECT_NEAR(k, near, 1e-4);
}

TEST(KernelD, DiscreteBiorthogonality) {
  RngStream rng(34, 0);
  for (int N = 1; N <= 4; ++N)
    for (double t : {0.5, 2.0, 5.0}) EXPECT_LT(discrete_biorthogonality_error(N, t, random_rates(N, rng)), 1e-8);
}

TEST(Lattice, SiteAndMacroscopic) {
  EXPECT_EQ(lattice_site(1.0, 100.0, 0.0), 100);
  EXPECT_EQ(lattice_site(1.0, 100.0, 0.25), 97);
  EXPECT_EQ(lattice_site(1.0, 100.0, -0.25), 102);
  EXPECT_NEAR(macroscopic(1.0, 100.0, 97), 0.3, 1e-15);
}

TEST(Rescaled, ConvergesToContinuumKernel) {
  const DriftSpec d({-1.0, 0.0, 1.0});
  const std::pair<KernelPoint, KernelPoint> cases[] = {{{0.3, 2}, {0.3, 2}}, {{0.3, 2}, {-0.5, 3}}, {{1.0, 1}, {0.2, 3}}};
  for (auto [a, b] : cases) {
    const double target = kernel(1.0, a, b, d);
    double prev = std::numeric_limits<double>::infinity();
    for (double T : {100.0, 400.0, 1600.0}) {
      const double err = std::abs(rescaled_kernel(1.0, T, a, b, d) - target);
      EXPECT_LT(err, prev) << "T=" << T;
      prev = err;
    }
    EXPECT_LT(prev, 0.05);
  }
}

TEST(Rescaled, SingleLevelZeroDrift) {
  const DriftSpec d({0.0});
  const double err100 = std::abs(rescaled_kernel(1.0, 100.0, {0.0, 1}, {0.0, 1}, d) - oracle::normal_density(0, 0, 1));
  const double err1600 = std::abs(rescaled_kernel(1.0, 1600.0, {0.0, 1}, {0.0, 1}, d) - oracle::normal_density(0, 0, 1));
  EXPECT_LT(err1600, err100);
  EXPECT_LT(err1600 * 40.0, 1.0);
  EXPECT_LT(std::abs(rescaled_kernel(1.0, 400.0, {20.0, 1}, {20.0, 1}, d)), 1e-8);
}

TEST(Rescaled, LargeTIsFinite) {
  const DriftSpec d({-1.5, 0.5, 1.2, -0.3});
  EXPECT_TRUE(std::isfinite(rescaled_kernel(2.0, 1600.0, {0.4, 4}, {-0.2, 3}, d)));
}
