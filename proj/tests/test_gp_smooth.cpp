#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hawkes_mrs/experiments.hpp"
#include "hawkes_mrs/gp_smooth.hpp"
#include "oracles.hpp"

using namespace hawkes_mrs;

namespace {

double total_variation(std::span<const double> v) {
  double tv = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

std::vector<SectorEstimate> uniform_estimates(std::size_t m, const std::vector<double>& g, double h) {
  std::vector<SectorEstimate> out;
  for (std::size_t j = 0; j < m; ++j) {
    SectorEstimate e;
    e.sector_index = j;
    e.sector = {10.0 * static_cast<double>(j), 10.0 * static_cast<double>(j + 1)};
    e.lambda_hat = 1.5 + static_cast<double>(j);
    e.event_count = 7 * j;
    e.histogram = LagHistogram(g, h);
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST(GpPosterior, NoiselessInterpolatesTrainingValues) {
  LagHistogram h({0.8, 0.3, -0.1, 0.05}, 1.0);
  GpConfig cfg;
  cfg.noise_var = 0.0;
  auto mean = posterior_mean(h, cfg);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(mean[k], h.values()[k], 1e-7);
}

TEST(GpPosterior, SinglePointByHand) {
  LagHistogram h({0.7}, 0.5);
  GpConfig cfg;  // theta0 = 1, noise 0.01
  auto mean = posterior_mean(h, cfg);
  EXPECT_NEAR(mean[0], 0.7 / 1.01, 1e-9);
}

TEST(GpPosterior, DenseOracleAgreement) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::size_t> kd(1, 5);
  std::uniform_real_distribution<double> hd(0.05, 2.0), t0(0.2, 3.0), t1(0.1, 4.0), nv(0.0, 0.5),
      tau(0.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = kd(rng);
    const double h = hd(rng);
    auto g = oracle::random_values(rng, k, -1.0, 2.0);
    GpConfig cfg;
    cfg.theta0 = t0(rng);
    cfg.theta1 = t1(rng);
    cfg.noise_var = nv(rng) + 0.01;
    for (int i = 0; i < 4; ++i) cfg.eval_grid.push_back(tau(rng));
    std::sort(cfg.eval_grid.begin(), cfg.eval_grid.end());
    LagHistogram hist(g, h);
    auto got = posterior_mean(hist, cfg);
    std::vector<double> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = hist.midpoint(i);
    for (std::size_t i = 0; i < cfg.eval_grid.size(); ++i) {
      // the diagonal jitter is part of the defined covariance
      const double want = oracle::gp_mean(x, g, cfg.theta0, cfg.theta1, cfg.noise_var + kGpJitter * cfg.theta0,
                                          cfg.eval_grid[i]);
      EXPECT_LE(std::abs(got[i] - want), 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(GpPosterior, ConstantHistogramInteriorPreserved) {
  const double c = 0.5;
  LagHistogram h(std::vector<double>(60, c), 0.1);
  auto mean = posterior_mean(h, GpConfig{});
  for (std::size_t k = 5; k + 5 < 60; ++k) EXPECT_NEAR(mean[k], c, 0.05 * c) << "bin " << k;
}

TEST(GpPosterior, ConfigValidation) {
  LagHistogram h({1.0}, 1.0);
  GpConfig bad;
  bad.theta0 = 0.0;
  EXPECT_THROW(posterior_mean(h, bad), ValidationError);
  bad = GpConfig{};
  bad.noise_var = -1.0;
  EXPECT_THROW(posterior_mean(h, bad), ValidationError);
  bad = GpConfig{};
  bad.eval_grid = {1.0, 0.5};
  EXPECT_THROW(posterior_mean(h, bad), ValidationError);
}

TEST(GpPosterior, LargeKStaysFactorizable) {
  auto set = benchmark_replication(9, 0);
  auto e = estimate_g(set, {0.0, 100.0}, 0.03, 200);
  EXPECT_NO_THROW(posterior_mean(e.histogram, GpConfig{}));
}

TEST(SmoothEstimates, KeepsMetadataAndDeterministic) {
  auto est = uniform_estimates(4, {0.9, 0.5, 0.2, 0.1}, 0.5);
  auto sm = smooth_estimates(est, GpConfig{});
  ASSERT_EQ(sm.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(sm[j].sector_index, est[j].sector_index);
    EXPECT_EQ(sm[j].lambda_hat, est[j].lambda_hat);
    EXPECT_EQ(sm[j].event_count, est[j].event_count);
    EXPECT_EQ(sm[j].histogram.bin_count(), 4u);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(sm[j].histogram.values()[k], sm[0].histogram.values()[k]);
  }
}

TEST(SmoothEstimates, CustomMidpointGrid) {
  auto est = uniform_estimates(2, {0.9, 0.5, 0.2, 0.1}, 0.5);
  GpConfig cfg;
  cfg.eval_grid = {0.125, 0.375, 0.625, 0.875, 1.125, 1.375, 1.625, 1.875};
  auto sm = smooth_estimates(est, cfg);
  EXPECT_EQ(sm[0].histogram.bin_count(), 8u);
  EXPECT_DOUBLE_EQ(sm[0].histogram.bin_width(), 0.25);
  cfg.eval_grid = {0.1, 0.3, 0.9};
  EXPECT_THROW(smooth_estimates(est, cfg), ValidationError);
}

TEST(SmoothEstimates, MixedBinWidthsRejected) {
  auto est = uniform_estimates(2, {0.9, 0.5}, 0.5);
  est[1].histogram = LagHistogram({0.9, 0.5}, 0.25);
  EXPECT_THROW(smooth_estimates(est, GpConfig{}), ValidationError);
}

TEST(SmoothEstimates, RemovesSpikesOfLargeK) {
  auto set = benchmark_replication(4, 0);
  auto e = estimate_g(set, {0.0, 100.0}, 0.06, 100);
  auto mean = posterior_mean(e.histogram, GpConfig{});
  EXPECT_LT(total_variation(mean), 0.5 * total_variation(e.histogram.values()));
  EXPECT_GT(mean[0], mean[50]);
}

TEST(SuggestM, PublishedAndClampedValues) {
  EXPECT_EQ(suggest_m(137578, 45), 12u);
  EXPECT_EQ(suggest_m(100, 1), 2u);
  EXPECT_EQ(suggest_m(250000, 100), 10u);
  EXPECT_THROW(suggest_m(0, 1), ValidationError);
  EXPECT_THROW(suggest_m(10, 0), ValidationError);
}

TEST(GpMrs, RatioSpreadOverKIsSmallerThanRaw) {
  // spread of ratio(3) over K in {20, 40, 200}, averaged over 10 replications
  double raw = 0.0, smoothed = 0.0;
  for (std::size_t rep = 0; rep < 10; ++rep) {
    auto set = benchmark_replication(20190810, rep);
    auto spread = [&](bool gp) {
      std::vector<double> r3;
      for (std::size_t k : {20, 40, 200}) {
        MrsConfig cfg;
        cfg.k_bins = k;
        cfg.h = MrsConfig::width_for(6.0, k);
        if (gp) cfg.gp = GpConfig{};
        r3.push_back(run_mrs(set, cfg).hierarchy.ratio(3));
      }
      return std::max(std::abs(r3[1] - r3[0]), std::abs(r3[2] - r3[0]));
    };
    raw += spread(false) / 10.0;
    smoothed += spread(true) / 10.0;
  }
  EXPECT_LE(smoothed, raw / 3.0);
}

TEST(SmoothEstimates, CostGrowsNoFasterThanCubic) {
  auto set = benchmark_replication(3, 0, 10);
  SectorGrid grid(set.window(), 10);
  std::vector<double> t;
  for (std::size_t k : {20, 40, 80}) {
    auto est = estimate_all_sectors(set, grid, 6.0 / static_cast<double>(k), k);
    t.push_back(best_time([&] { (void)smooth_estimates(est, GpConfig{}); }, 9));
  }
  EXPECT_LE(t[1] / t[0], 2.0 * 8.0);
  EXPECT_LE(t[2] / t[0], 2.0 * 64.0);
  EXPECT_GT(t[2], t[0]);
}
