#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hawkes_mrs/experiments.hpp"
#include "hawkes_mrs/mrs.hpp"
#include "oracles.hpp"

using namespace hawkes_mrs;

namespace {

SectorEstimate make_estimate(std::size_t j, double width, std::vector<double> g, double h) {
  SectorEstimate e;
  e.sector_index = j;
  e.sector = {width * static_cast<double>(j), width * static_cast<double>(j + 1)};
  e.histogram = LagHistogram(std::move(g), h);
  return e;
}

std::vector<BoundaryScore> scores_of(const std::vector<double>& v) {
  std::vector<BoundaryScore> s;
  for (std::size_t i = 0; i < v.size(); ++i) s.push_back({100.0 * static_cast<double>(i + 1), v[i], false});
  return s;
}

}  // namespace

TEST(Nmse, IdenticalIsZero) {
  LagHistogram a({0.3, 0.2, 0.1}, 0.75);
  EXPECT_EQ(nmse(a, a), 0.0);
}

TEST(Nmse, HandEvaluatedExample) {
  LagHistogram a({1.0, 1.0}, 0.5);
  LagHistogram b({1.0, 3.0}, 0.5);
  EXPECT_NEAR(nmse(a, b), 0.0625, 1e-15);
}

TEST(Nmse, MismatchedShapesRejected) {
  EXPECT_THROW(nmse(LagHistogram({1.0, 1.0}, 0.5), LagHistogram({1.0}, 0.5)), ValidationError);
  EXPECT_THROW(nmse(LagHistogram({1.0, 1.0}, 0.5), LagHistogram({1.0, 1.0}, 0.6)), ValidationError);
}

TEST(Nmse, ZeroMassIsFlaggedLowSignal) {
  LagHistogram a({0.1, -0.1}, 0.5);
  LagHistogram b({0.2, 0.1}, 0.5);
  auto r = nmse_detail(a, b);
  EXPECT_TRUE(r.low_signal);
  EXPECT_TRUE(std::isfinite(r.value));
  EXPECT_FALSE(nmse_detail(b, b).low_signal);
}

TEST(NmseProperty, SymmetryScaleInvarianceIdentity) {
  std::mt19937_64 rng(2019);
  std::uniform_int_distribution<std::size_t> kd(1, 40);
  std::uniform_real_distribution<double> hd(0.01, 2.0), cd(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = kd(rng);
    const double h = hd(rng);
    auto va = oracle::random_values(rng, k, 0.0, 2.0);
    auto vb = oracle::random_values(rng, k, 0.0, 2.0);
    LagHistogram a(va, h), b(vb, h);
    EXPECT_DOUBLE_EQ(nmse(a, b), nmse(b, a));
    EXPECT_EQ(nmse(a, a), 0.0);
    const double c = cd(rng);
    std::vector<double> scaled(va);
    for (double& x : scaled) x *= c;
    EXPECT_NEAR(nmse(a, LagHistogram(scaled, h)), 0.0, 1e-20);
    EXPECT_GE(nmse(a, b), 0.0);
  }
}

TEST(RankBoundaries, RatiosFromScores) {
  auto h = rank_boundaries(scores_of({0.9, 0.1, 0.05}));
  ASSERT_EQ(h.threshold_ratios.size(), 4u);
  EXPECT_DOUBLE_EQ(h.ratio(1), 1.0);
  EXPECT_NEAR(h.ratio(2), 0.1 / 0.9, 1e-15);
  EXPECT_NEAR(h.ratio(3), 0.05 / 0.9, 1e-15);
  EXPECT_EQ(h.ratio(4), 0.0);
  EXPECT_NEAR(h.ratio(2), 0.111, 5e-4);
  EXPECT_NEAR(h.ratio(3), 0.0556, 5e-5);
}

TEST(RankBoundaries, TiesBreakTowardsEarlierBoundary) {
  auto h = rank_boundaries(scores_of({0.2, 0.5, 0.2, 0.5}));
  EXPECT_EQ(h.ranking, (std::vector<std::size_t>{1, 3, 0, 2}));
  EXPECT_DOUBLE_EQ(h.new_position(2), 200.0);
  EXPECT_DOUBLE_EQ(h.new_position(3), 400.0);
  EXPECT_EQ(h.rank_of(0), 3u);
}

TEST(RankBoundaries, AllZeroScores) {
  auto h = rank_boundaries(scores_of({0.0, 0.0, 0.0}));
  EXPECT_EQ(h.ranking, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(h.ratio(1), 1.0);
  for (std::size_t r = 2; r <= 4; ++r) EXPECT_EQ(h.ratio(r), 0.0);
}

TEST(BuildHierarchy, AllEqualHistogramsScoreZero) {
  std::vector<SectorEstimate> est;
  for (std::size_t j = 0; j < 5; ++j) est.push_back(make_estimate(j, 10.0, {0.5, 0.25}, 0.5));
  auto h = build_hierarchy(est);
  for (const auto& s : h.scores) EXPECT_EQ(s.nmse, 0.0);
  EXPECT_DOUBLE_EQ(h.new_position(2), 10.0);
}

TEST(BuildHierarchy, FewerThanTwoSectorsRejected) {
  EXPECT_THROW(build_hierarchy({make_estimate(0, 10.0, {1.0}, 1.0)}), ValidationError);
  EXPECT_THROW(rank_boundaries({}), ValidationError);
}

TEST(Segment, ResolutionsAndErrors) {
  auto h = rank_boundaries(scores_of({0.1, 0.9, 0.05, 0.05, 0.7}));
  EXPECT_TRUE(segment(h, 1).empty());
  EXPECT_EQ(segment(h, 2), (std::vector<double>{200.0}));
  EXPECT_EQ(segment(h, 3), (std::vector<double>{200.0, 500.0}));
  EXPECT_EQ(segment(h, 6), (std::vector<double>{100.0, 200.0, 300.0, 400.0, 500.0}));
  EXPECT_THROW(segment(h, 0), ValidationError);
  EXPECT_THROW(segment(h, 7), ValidationError);
}

TEST(HierarchyProperty, NestedAndMonotone) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> md(2, 30);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = md(rng);
    auto v = oracle::random_values(rng, m - 1, 0.0, 1.0);
    if (trial % 5 == 0) v[0] = v.back();  // force a tie now and then
    auto h = rank_boundaries(scores_of(v));
    EXPECT_EQ(h.ratio(1), 1.0);
    EXPECT_EQ(h.ratio(m), 0.0);
    for (std::size_t r = 1; r < m; ++r) {
      EXPECT_GE(h.ratio(r), h.ratio(r + 1));
      auto lo = segment(h, r);
      auto hi = segment(h, r + 1);
      ASSERT_EQ(hi.size(), lo.size() + 1);
      EXPECT_TRUE(std::includes(hi.begin(), hi.end(), lo.begin(), lo.end()));
    }
    auto perm = h.ranking;
    std::sort(perm.begin(), perm.end());
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(perm[i], i);
  }
}

TEST(Mrs, BenchmarkFullResolutionCutsEverywhere) {
  auto run = run_mrs(benchmark_replication(1, 0), MrsConfig{});
  auto cuts = segment(run.hierarchy, 10);
  ASSERT_EQ(cuts.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(cuts[i], 100.0 * static_cast<double>(i + 1));
}

TEST(Mrs, StationaryNullCalibration) {
  // with no change point the top score is small next to a real change
  auto model = PiecewiseHawkesModel::stationary(kBenchmarkWindow, 2.0, ExponentialKernel{1.0, 2.0});
  auto null_run = run_mrs(simulate_set(model, kBenchmarkWindow, 40, 606), MrsConfig{});
  auto real_run = run_mrs(benchmark_replication(606, 0), MrsConfig{});
  const double null_max = null_run.hierarchy.scores[null_run.hierarchy.ranking[0]].nmse;
  const double real_max = real_run.hierarchy.scores[real_run.hierarchy.ranking[0]].nmse;
  EXPECT_TRUE(segment(null_run.hierarchy, 1).empty());
  EXPECT_LT(null_max, real_max);
}
