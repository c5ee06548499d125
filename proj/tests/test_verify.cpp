#include <gtest/gtest.h>

#include <cmath>

#include "gtminor/sim_matrix.hpp"
#include "gtminor/verify.hpp"
#include "oracles.hpp"

using namespace gtminor;

namespace {

const DriftSpec kThree({-1.0, 0.0, 1.0});

// Synthetic estimate whose bin counts are the (rounded) expected counts of ρ.
CorrelationEstimate exact_histogram(const std::vector<double>& edges, const std::function<double(double)>& rho,
                                    int level, std::uint64_t replicas) {
  CorrelationEstimate est;
  est.level = level;
  est.bin_edges = edges;
  est.replicas = replicas;
  const auto avg = bin_averages(rho, edges);
  double inside = 0;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    const double expected = avg[b] * (edges[b + 1] - edges[b]) * double(replicas);
    est.counts.push_back(std::uint64_t(std::llround(expected)));
    inside += expected;
  }
  est.outside = std::uint64_t(std::llround(double(level) * double(replicas) - inside));
  est.density_estimate.resize(avg.size());
  est.std_error.resize(avg.size());
  for (std::size_t b = 0; b < avg.size(); ++b)
    est.density_estimate[b] = double(est.counts[b]) / double(replicas) / est.width(b);
  return est;
}

}  // namespace

TEST(Edges, CoverRangeWithOffset) {
  const auto e = make_edges(-1.0, 1.0, 0.25);
  EXPECT_DOUBLE_EQ(e.front(), -1.0);
  EXPECT_GE(e.back(), 1.0);
  const auto f = make_edges(-1.0, 1.0, 0.25, 0.1);
  EXPECT_LE(f.front(), -1.0);
  EXPECT_NEAR(std::fmod(f[3] - 0.1 + 100.0, 0.25), 0.0, 1e-12);
  EXPECT_THROW(make_edges(1.0, 0.0, 0.1), std::invalid_argument);
  const auto d = default_edges(1.0, kThree);
  EXPECT_LT(d.front(), -1.0 - 3.0);
  EXPECT_GT(d.back(), 1.0 + 3.0);
}

TEST(OnePoint, DeterministicSampleFillsOneBin) {
  std::vector<GTPattern> s(10, GTPattern::from_levels({{0.05}, {-0.5, 0.3}}));
  const auto est = estimate_one_point(s, 1, make_edges(-1.0, 1.0, 0.1));
  std::uint64_t total = 0;
  for (auto c : est.counts) total += c;
  EXPECT_EQ(total, 10u);
  EXPECT_EQ(est.counts[10], 10u);
  EXPECT_NEAR(est.density_estimate[10], 10.0, 1e-12);
}

TEST(OnePoint, IntegratesToLevel) {
  const auto samples = simulate_matrix(3, 1.0, kThree, 71, 2000);
  for (int n = 1; n <= 3; ++n) {
    const auto est = estimate_one_point(samples, n, default_edges(1.0, kThree));
    double mass = double(est.outside) / double(est.replicas);
    std::uint64_t total = est.outside;
    for (std::size_t b = 0; b < est.bins(); ++b) {
      mass += est.density_estimate[b] * est.width(b);
      total += est.counts[b];
    }
    EXPECT_NEAR(mass, double(n), 1e-12);
    EXPECT_EQ(total, 2000u * std::uint64_t(n));
  }
}

TEST(OnePoint, RejectsBadInput) {
  EXPECT_THROW(estimate_one_point(std::vector<GTPattern>{}, 1, {0.0, 1.0}), std::invalid_argument);
  std::vector<GTPattern> s(1, GTPattern(2, 0.0));
  EXPECT_THROW(estimate_one_point(s, 3, {0.0, 1.0}), std::out_of_range);
  EXPECT_THROW(estimate_one_point(s, 1, {1.0, 0.0}), std::invalid_argument);
}

TEST(Compare, ExactHistogramHasTinyDistance) {
  const auto edges = default_edges(1.0, kThree);
  auto rho = [](double x) { return kernel(1.0, {x, 2}, {x, 2}, kThree); };
  const auto est = exact_histogram(edges, rho, 2, 10000000);
  const auto rep = compare_to_kernel(est, 1.0, kThree, 0.01);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.value, 1e-4);
}

TEST(Compare, SingleLevelGaussianSamples) {
  const DriftSpec d({0.4});
  const auto samples = simulate_matrix(1, 1.0, d, 72, 100000);
  const auto est = estimate_one_point(samples, 1, default_edges(1.0, d));
  EXPECT_LT(compare_to_kernel(est, 1.0, d, 0.02).value, 0.02);
  const auto ref = bin_averages([](double x) { return oracle::normal_density(x, 0.4, 1.0); }, est.bin_edges);
  EXPECT_LT(compare_to_density(est, ref, 1.0, 1.0, Statistic::Chi2).value, 1.5);
}

TEST(Compare, WrongDriftIsDetected) {
  const auto samples = simulate_matrix(3, 1.0, kThree, 73, 20000);
  const DriftSpec shifted({-1.0, 0.0, 1.5});
  const auto est = estimate_one_point(samples, 3, default_edges(1.0, shifted));
  EXPECT_FALSE(compare_to_kernel(est, 1.0, shifted, 0.05).pass);
}

TEST(Compare, StatisticNames) {
  EXPECT_EQ(parse_statistic("L1"), Statistic::L1);
  EXPECT_EQ(parse_statistic("sup"), Statistic::Sup);
  EXPECT_EQ(to_string(Statistic::Chi2), "chi2");
  EXPECT_THROW(parse_statistic("KS"), std::invalid_argument);
  EXPECT_TRUE(DistanceReport::range("r", Statistic::Ratio, 50.0, 30.0, 300.0).pass);
  EXPECT_FALSE(DistanceReport::range("r", Statistic::Ratio, 20.0, 30.0, 300.0).pass);
}

TEST(TwoPoint, DiagonalExcludesSelfPairs) {
  std::vector<GTPattern> s(4, GTPattern::from_levels({{0.1}, {-0.3, 0.6}}));
  const auto edges = make_edges(-1.0, 1.0, 0.5);
  const auto same = estimate_two_point(s, 2, 2, edges);
  double total = 0;
  for (double g : same) total += g * 0.25;
  EXPECT_NEAR(total, 2.0, 1e-12);  // ordered pairs of distinct points
  const auto cross = estimate_two_point(s, 1, 2, edges);
  total = 0;
  for (double g : cross) total += g * 0.25;
  EXPECT_NEAR(total, 2.0, 1e-12);
}

TEST(RandomInputs, RespectConstraints) {
  RngStream rng(74, 0);
  for (int i = 0; i < 50; ++i) {
    const DriftSpec d = random_drifts(6, rng);
    EXPECT_GE(d.separation(), 0.1);
    for (double m : d.drifts()) EXPECT_TRUE(m >= -2.0 && m <= 2.0);
    const GTPattern p = random_pattern(4, rng, 0.0, 2.0, 0.05);
    EXPECT_TRUE(interlaces(p));
    const RateSpec r = random_rates(4, rng);
    EXPECT_GE(r.separation(), 0.1);
  }
}

TEST(Biorthogonalize, SingleLevel) {
  const DriftSpec d({0.7});
  const Matrix C = biorthogonalize_numerically(1, 1.3, d);
  EXPECT_NEAR(C(0, 0), std::exp(-0.5 * 1.3 * 0.49), 1e-9);
}

TEST(Biorthogonalize, RecoversClosedForm) {
  for (double t : {0.5, 1.0}) {
    const Matrix num = biorthogonalize_numerically(3, t, kThree);
    const Matrix exact = closed_form_phi_coefficients(3, t, kThree);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(num(i, j), exact(i, j), 1e-7 * std::max(1.0, std::abs(exact(i, j))));
  }
}

TEST(Biorthogonalize, ClosedFormMatchesPhiCap) {
  const Matrix C = closed_form_phi_coefficients(3, 1.0, kThree);
  for (double x : {-1.0, 0.5})
    for (int l = 1; l <= 3; ++l) {
      double v = 0;
      for (int i = 1; i <= 3; ++i) v += C(std::size_t(l - 1), std::size_t(i - 1)) * std::exp(kThree.mu(i) * x);
      EXPECT_NEAR(v, phi_cap(3, l, 1.0, x, kThree), 1e-12);
    }
}

TEST(FullPattern, NonInterlacingGivesZero) {
  const DriftSpec d({-1.0, 1.0});
  const GTPattern bad = GTPattern::from_levels({{2.0}, {-1.0, 1.0}});
  EXPECT_EQ(density_full_pattern(1.0, bad, d), 0.0);
  EXPECT_NEAR(correlation(1.0, pattern_points(bad), d), 0.0, 1e-10);
}

TEST(FullPattern, SingleLevelIsExact) {
  const DriftSpec d({0.3});
  const std::vector<GTPattern> ps{GTPattern::from_levels({{-0.7}}), GTPattern::from_levels({{1.1}})};
  EXPECT_LT(full_pattern_identity(1.0, d, ps), 1e-10);
}

TEST(Pde, ResidualShrinksQuadratically) {
  RngStream rng(75, 0);
  std::vector<GTPattern> grid;
  for (int i = 0; i < 4; ++i) grid.push_back(random_pattern(3, rng, 0.0, 2.0, 0.05));
  const double coarse = fokker_planck_residual(1.0, grid, 1e-2, kThree);
  const double fine = fokker_planck_residual(1.0, grid, 1e-3, kThree);
  EXPECT_GT(coarse / fine, 30.0);
  EXPECT_LT(coarse / fine, 300.0);
}

TEST(Pde, SingleLevelHeatEquation) {
  const DriftSpec d({0.5});
  const std::vector<GTPattern> grid{GTPattern::from_levels({{0.2}}), GTPattern::from_levels({{-1.0}})};
  EXPECT_LT(fokker_planck_residual(1.0, grid, 1e-3, d), 1e-6);
}

TEST(Pde, WrongOperatorDriftIsDetected) {
  RngStream rng(76, 0);
  std::vector<GTPattern> grid;
  for (int i = 0; i < 3; ++i) grid.push_back(random_pattern(3, rng, 0.0, 2.0, 0.05));
  const double right = fokker_planck_residual(1.0, grid, 1e-3, kThree);
  const double wrong = fokker_planck_residual(1.0, grid, 1e-3, kThree, DriftSpec({-0.5, 0.5, 1.5}));
  EXPECT_GT(wrong, 100.0 * right);
}

TEST(Pde, BoundaryLogDerivative) {
  RngStream rng(77, 0);
  std::vector<GTPattern> grid;
  for (int i = 0; i < 4; ++i) grid.push_back(random_pattern(3, rng, 0.0, 2.0, 0.05));
  EXPECT_LT(boundary_condition_check(1.0, grid, kThree), 1e-6);
  const DriftSpec flat({0.5, 0.5, 0.5});
  EXPECT_LT(boundary_condition_check(1.0, grid, flat), 1e-6);
}

TEST(Ladders, EmptyInputs) {
  EXPECT_TRUE(convergence_ladder(2, 1.0, std::vector<double>{1e-2}, kThree, 1, 0).empty());
  EXPECT_TRUE(scaling_study(1.0, std::vector<double>{}, kThree, 1, 100).empty());
  const double v[] = {1.0, 1.05, 0.5};
  EXPECT_TRUE(non_increasing(v));
  const double w[] = {1.0, 1.2};
  EXPECT_FALSE(non_increasing(w));
}

TEST(Ladders, SmallScalingStudy) {
  const DriftSpec d({-0.5, 0.5});
  const std::vector<double> Ts{25.0, 400.0};
  const auto rows = scaling_study(1.0, Ts, d, 78, 4000);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].parameter, 400.0);
  EXPECT_EQ(rows[0].distances.size(), 2u);
  EXPECT_LT(rows[1].max_distance, 0.12);
}
