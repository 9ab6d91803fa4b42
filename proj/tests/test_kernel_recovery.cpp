#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "hawkes_mrs/experiments.hpp"
#include "hawkes_mrs/kernel_recovery.hpp"
#include "hawkes_mrs/model_eval.hpp"
#include "oracles.hpp"

using namespace hawkes_mrs;

namespace {

// Relative L2 error of a tabulated kernel against a*exp(-b*tau) on (0, A].
double l2_rel_error(const TabulatedKernel& k, double a, double b) {
  const double A = k.support();
  auto diff2 = [&](double t) {
    const double d = k(t) - a * std::exp(-b * t);
    return d * d;
  };
  auto true2 = [&](double t) { return a * a * std::exp(-2.0 * b * t); };
  return std::sqrt(oracle::trapezoid(diff2, 0.0, A, 20000) / oracle::trapezoid(true2, 0.0, A, 20000));
}

WienerHopfSolution analytic_solve(double a, double b, std::size_t q, double support) {
  return solve_wiener_hopf([=](double t) { return oracle::exp_hawkes_g(a, b, t); }, q, support);
}

}  // namespace

TEST(WienerHopf, ZeroGGivesZeroKernel) {
  auto sol = solve_wiener_hopf([](double) { return 0.0; }, 16, 2.0);
  for (double v : sol.kernel.values()) EXPECT_EQ(v, 0.0);
}

TEST(WienerHopf, AnalyticOracleRoundTrip) {
  auto sol = analytic_solve(1.0, 2.0, 64, 4.0);
  EXPECT_LT(l2_rel_error(sol.kernel, 1.0, 2.0), 0.05);
  EXPECT_LT(sol.residual_inf, 1e-8 * sol.rhs_inf);
}

TEST(WienerHopf, AnalyticOracleBenchmarkKernels) {
  for (auto [a, b] : {std::pair{1.0, 2.0}, {2.0, 4.0}, {3.0, 4.0}}) {
    auto sol = analytic_solve(a, b, 64, 6.0);
    EXPECT_LT(l2_rel_error(sol.kernel, a, b), 0.05) << a << "," << b;
    EXPECT_LT(sol.residual_inf, 1e-8 * sol.rhs_inf);
  }
}

TEST(WienerHopf, ErrorShrinksWithQ) {
  std::vector<double> err;
  for (std::size_t q : {16, 32, 64, 128}) err.push_back(l2_rel_error(analytic_solve(2.0, 4.0, q, 6.0).kernel, 2.0, 4.0));
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_LT(err[i], err[i - 1]);
}

TEST(WienerHopf, NodesAreMidpoints) {
  auto sol = analytic_solve(1.0, 2.0, 8, 4.0);
  EXPECT_DOUBLE_EQ(sol.kernel.step(), 0.5);
  EXPECT_DOUBLE_EQ(sol.kernel.node(0), 0.25);
  EXPECT_DOUBLE_EQ(sol.kernel.node(7), 3.75);
}

TEST(WienerHopf, SingularSystemRejected) {
  // G = -(1/A) * ones makes I + step*G singular
  EXPECT_THROW(solve_wiener_hopf([](double) { return -1.0; }, 16, 1.0), NumericalError);
}

TEST(WienerHopf, NonFiniteAndBadArguments) {
  EXPECT_THROW(solve_wiener_hopf([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 8, 1.0),
               NumericalError);
  EXPECT_THROW(solve_wiener_hopf([](double) { return 0.0; }, 1, 1.0), ValidationError);
  EXPECT_THROW(solve_wiener_hopf([](double) { return 0.0; }, 8, 0.0), ValidationError);
}

TEST(RecoverMu, Algebra) {
  TabulatedKernel half({0.25, 0.25}, 1.0);  // integral 0.5
  EXPECT_DOUBLE_EQ(recover_mu(4.0, half), 2.0);
  EXPECT_DOUBLE_EQ(recover_mu(3.3, TabulatedKernel({0.0, 0.0}, 1.0)), 3.3);
  EXPECT_THROW(recover_mu(4.0, TabulatedKernel({0.5, 0.5}, 1.0)), NumericalError);
  TabulatedKernel k({0.31, 0.2, 0.07}, 0.4);
  const double mu = recover_mu(2.7, k);
  EXPECT_NEAR(mu / (1.0 - k.integral()), 2.7, 1e-15);
}

TEST(FitSegments, BenchmarkWithTrueCuts) {
  auto set = benchmark_replication(20190810, 0);
  auto fits = fit_segments(set, {200.0, 600.0}, FitConfig{});
  ASSERT_EQ(fits.size(), 3u);
  const double mu[] = {2.0, 1.5, 1.0};
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_TRUE(fits[s].stable);
    EXPECT_NEAR(fits[s].mu_hat / mu[s], 1.0, 0.15) << "segment " << s;
    EXPECT_LT(fits[s].residual_inf, 1e-8 * fits[s].rhs_inf);
  }
  EXPECT_EQ(fits[1].segment, (Interval{200.0, 600.0}));
}

TEST(FitSegments, StationaryWithoutCuts) {
  auto model = PiecewiseHawkesModel::stationary(kBenchmarkWindow, 2.0, ExponentialKernel{1.0, 2.0});
  auto set = simulate_set(model, kBenchmarkWindow, 40, 88);
  auto fits = fit_segments(set, {}, FitConfig{});
  ASSERT_EQ(fits.size(), 1u);
  EXPECT_NEAR(fits[0].mu_hat, 2.0, 0.3);
  EXPECT_NEAR(fits[0].branching_ratio, 0.5, 0.1);
  EXPECT_NEAR(fits[0].kernel(0.05) / std::exp(-0.1), 1.0, 0.2);
}

TEST(FitSegments, GpSmoothedCurveAlsoFits) {
  auto set = benchmark_replication(20190810, 1);
  FitConfig cfg;
  cfg.gp = GpConfig{};
  auto fits = fit_segments(set, {200.0, 600.0}, cfg);
  for (const auto& f : fits) EXPECT_LT(f.residual_inf, 1e-8 * f.rhs_inf);
}

TEST(FitSegments, CutValidation) {
  auto set = benchmark_replication(1, 0, 2);
  EXPECT_THROW(fit_segments(set, {600.0, 200.0}, FitConfig{}), ValidationError);
  EXPECT_THROW(fit_segments(set, {0.0}, FitConfig{}), ValidationError);
  EXPECT_THROW(fit_segments(set, {1000.0}, FitConfig{}), ValidationError);
}

TEST(FitSegments, EmptySegmentIsReported) {
  ObservationSet set({EventSeries({0.0, 100.0}, {1.0, 1.2, 2.0, 80.0, 80.5})});
  EXPECT_THROW(fit_segments(set, {10.0, 50.0}, FitConfig{}), ValidationError);
}

TEST(ToModel, ClampsAndPreservesRate) {
  auto set = benchmark_replication(20190810, 2);
  auto fits = fit_segments(set, {200.0, 600.0}, FitConfig{});
  auto model = to_model(fits);
  ASSERT_EQ(model.piece_count(), 3u);
  for (std::size_t p = 0; p < 3; ++p) {
    const auto* k = model.pieces()[p].kernel.tabulated();
    ASSERT_NE(k, nullptr);
    for (double v : k->values()) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(model.stationary_rate(p), fits[p].lambda_hat, 1e-12 * fits[p].lambda_hat);
  }
  EXPECT_TRUE(std::isfinite(log_likelihood(set, model)));
}
