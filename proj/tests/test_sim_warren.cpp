#include <gtest/gtest.h>

#include <cmath>

#include "gtminor/io.hpp"
#include "gtminor/sim_warren.hpp"
#include "gtminor/verify.hpp"
#include "oracles.hpp"

using namespace gtminor;

TEST(Warren, SingleLevelIsDriftedBrownianMotion) {
  const DriftSpec d({0.8});
  const auto samples = simulate_warren_replicas(1, 2.0, 1e-2, d, 61, 50000);
  double m = 0, s = 0;
  for (const auto& p : samples) {
    m += p(1, 1);
    s += p(1, 1) * p(1, 1);
  }
  m /= double(samples.size());
  s = s / double(samples.size()) - m * m;
  EXPECT_NEAR(m, 1.6, 5 * std::sqrt(2.0 / 50000));
  EXPECT_NEAR(s, 2.0, 5 * 2.0 * std::sqrt(2.0 / 50000));
}

TEST(Warren, InterlacesAfterEveryStep) {
  const DriftSpec d({1.0, -1.0, 0.5});
  RngStream rng(62, 0);
  bool ok = true;
  const auto run = simulate_warren_run(3, 1.0, 1e-3, d, rng,
                                       [&](std::uint64_t, const GTPattern& p) { ok = ok && interlaces(p); });
  EXPECT_TRUE(ok);
  EXPECT_EQ(run.steps, 1000u);
  EXPECT_GT(run.clamp_events, 0u);
}

TEST(Warren, ZeroStepsLeavesOrigin) {
  RngStream rng(63, 0);
  const GTPattern p = simulate_warren(2, 0.0, 1e-3, DriftSpec({0.0, 1.0}), rng);
  EXPECT_EQ(p, GTPattern(2, 0.0));
  EXPECT_THROW(simulate_warren(2, 1.0, 0.0, DriftSpec({0.0, 1.0}), rng), std::invalid_argument);
}

TEST(Warren, LowerLevelsIgnoreHigherDrifts) {
  // Levels below n never read level n, so with the same stream they coincide exactly.
  RngStream a(64, 0), b(64, 0);
  const GTPattern pa = simulate_warren(3, 1.0, 1e-3, DriftSpec({0.3, -0.2, 1.0}), a);
  const GTPattern pb = simulate_warren(3, 1.0, 1e-3, DriftSpec({0.3, -0.2, -2.0}), b);
  EXPECT_EQ(pa(1, 1), pb(1, 1));
  EXPECT_EQ(pa(2, 1), pb(2, 1));
  EXPECT_EQ(pa(2, 2), pb(2, 2));
  EXPECT_NE(pa(3, 3), pb(3, 3));
}

TEST(Warren, CoupledFinestRungMatchesPlainRun) {
  const DriftSpec d({-1.0, 0.0, 1.0});
  const double deltas[] = {1e-2, 1e-3};
  RngStream a(65, 3), b(65, 3);
  const auto runs = simulate_warren_coupled(3, 0.5, deltas, d, a);
  const auto plain = simulate_warren_run(3, 0.5, 1e-3, d, b);
  EXPECT_EQ(runs[1].pattern, plain.pattern);
  EXPECT_EQ(runs[1].clamp_events, plain.clamp_events);
  EXPECT_EQ(runs[0].steps, 50u);
  EXPECT_EQ(runs[1].steps, 500u);
}

TEST(Warren, CoupledRejectsIncommensurateSteps) {
  RngStream rng(66, 0);
  const double deltas[] = {1e-3, 2.5e-3};
  EXPECT_THROW(simulate_warren_coupled(2, 1.0, deltas, DriftSpec({0.0, 1.0}), rng), std::invalid_argument);
  EXPECT_TRUE(simulate_warren_coupled(2, 1.0, std::span<const double>{}, DriftSpec({0.0, 1.0}), rng).empty());
}

TEST(Warren, ClampFractionShrinksWithStep) {
  const DriftSpec d({-1.0, 0.0, 1.0});
  const double deltas[] = {1e-2, 1e-3, 1e-4};
  std::vector<double> events(3, 0), checks(3, 0);
  for (std::size_t i = 0; i < 200; ++i) {
    RngStream rng(67, i);
    const auto runs = simulate_warren_coupled(3, 1.0, deltas, d, rng);
    for (std::size_t j = 0; j < 3; ++j) {
      events[j] += double(runs[j].clamp_events);
      checks[j] += double(runs[j].clamp_checks);
    }
  }
  const double f0 = events[0] / checks[0], f1 = events[1] / checks[1], f2 = events[2] / checks[2];
  EXPECT_GT(f0, f1);
  EXPECT_GT(f1, f2);
  // Per-step clamp probability of a reflected walk scales like √Δ.
  EXPECT_NEAR(std::log(f0 / f2) / std::log(100.0), 0.5, 0.15);
}

TEST(Warren, ZeroDriftMatchesGueMinors) {
  const DriftSpec d({0.0, 0.0});
  const auto samples = simulate_warren_replicas(2, 1.0, 1e-4, d, 68, 20000);
  const auto edges = make_edges(-5.0, 5.0, 0.25);
  const auto est = estimate_one_point(samples, 2, edges);
  const auto ref = bin_averages([](double x) { return oracle::gue_density(2, x, 1.0); }, edges);
  EXPECT_LT(compare_to_density(est, ref, 2.0, 0.05).value, 0.05);
}

TEST(Warren, ReplicasIndependentOfWorkers) {
  const DriftSpec d({-1.0, 0.0, 1.0});
  const auto one = patterns_csv(simulate_warren_replicas(3, 0.2, 1e-3, d, 69, 200, 1));
  EXPECT_EQ(one, patterns_csv(simulate_warren_replicas(3, 0.2, 1e-3, d, 69, 200, 4)));
  EXPECT_EQ(one, patterns_csv(simulate_warren_replicas(3, 0.2, 1e-3, d, 69, 200, 16)));
}
