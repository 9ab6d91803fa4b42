#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/cumulants.hpp"
#include "hawkes_mrs/gp_smooth.hpp"
#include "hawkes_mrs/mrs.hpp"
#include "hawkes_mrs/simulate.hpp"

namespace hawkes_mrs {

/// Three-piece synthetic benchmark on [0, 1000]: baselines 2, 1.5, 1 with
/// kernels 1*exp(-2t), 2*exp(-4t), 3*exp(-4t) on [0,200), [200,600), [600,1000).
inline PiecewiseHawkesModel three_piece_benchmark() {
  return PiecewiseHawkesModel({0.0, 200.0, 600.0, 1000.0},
                              {HawkesPiece{2.0, ExponentialKernel{1.0, 2.0}},
                               HawkesPiece{1.5, ExponentialKernel{2.0, 4.0}},
                               HawkesPiece{1.0, ExponentialKernel{3.0, 4.0}}});
}

inline constexpr Interval kBenchmarkWindow{0.0, 1000.0};
inline constexpr std::size_t kBenchmarkSeries = 40;

/// Segmentation settings. The lag support K*h is what the bin count trades
/// against: at fixed support, more bins means narrower, noisier bins.
struct MrsConfig {
  std::size_t sectors{10};  // M
  std::size_t k_bins{8};    // K
  double h{0.75};
  std::optional<GpConfig> gp;
  GOptions g_options{};

  /// Bin width keeping the support fixed at `support` for K bins.
  static double width_for(double support, std::size_t k) { return support / static_cast<double>(k); }
};

struct MrsRun {
  std::vector<SectorEstimate> raw;
  std::vector<SectorEstimate> scored;  // raw, or GP-smoothed when configured
  SegmentationHierarchy hierarchy;
};

inline MrsRun run_mrs(const ObservationSet& set, const MrsConfig& cfg) {
  MrsRun run;
  const SectorGrid grid(set.window(), cfg.sectors);
  run.raw = estimate_all_sectors(set, grid, cfg.h, cfg.k_bins, cfg.g_options);
  run.scored = cfg.gp ? smooth_estimates(run.raw, *cfg.gp) : run.raw;
  run.hierarchy = build_hierarchy(run.scored);
  return run;
}

/// Replication `rep` of the benchmark: 40 series from a seed derived from
/// `master`.
inline ObservationSet benchmark_replication(std::uint64_t master, std::size_t rep,
                                            std::size_t series = kBenchmarkSeries) {
  return simulate_set(three_piece_benchmark(), kBenchmarkWindow, series, derive_seed(master, rep));
}

inline bool same_cuts(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-6) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Timing helpers
// ---------------------------------------------------------------------------

/// Best-of-`reps` wall time of f() in seconds.
template <class F>
double best_time(F&& f, int reps = 5) {
  double best = INFINITY;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

struct LineFit {
  double slope{0.0};
  double intercept{0.0};
  double r_squared{0.0};
};

/// Ordinary least squares y = a + b x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit_line needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_line needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// ---------------------------------------------------------------------------
// Scaling of the g path
// ---------------------------------------------------------------------------

struct ScalingPoint {
  double x{0.0};  // N*K or M
  double seconds{0.0};
  std::size_t events{0};
};

/// Time of estimate_all_sectors + build_hierarchy.
inline double time_g_path(const ObservationSet& set, std::size_t m, std::size_t k, double h, int reps = 5) {
  const SectorGrid grid(set.window(), m);
  return best_time(
      [&] {
        auto est = estimate_all_sectors(set, grid, h, k);
        auto hier = build_hierarchy(est);
        (void)hier;
      },
      reps);
}

/// Work grows with N*K: benchmark data restricted to the first L series,
/// M = 10, K = 8, h = 0.75.
inline std::vector<ScalingPoint> scaling_vs_nk(std::uint64_t seed, const std::vector<std::size_t>& series_counts) {
  const std::size_t most = *std::max_element(series_counts.begin(), series_counts.end());
  const ObservationSet all = simulate_set(three_piece_benchmark(), kBenchmarkWindow, most, seed);
  std::vector<ScalingPoint> out;
  for (std::size_t l : series_counts) {
    std::vector<EventSeries> sub(all.series().begin(), all.series().begin() + static_cast<std::ptrdiff_t>(l));
    const ObservationSet set(std::move(sub));
    const std::size_t k = 8;
    out.push_back({static_cast<double>(set.total_count() * k), time_g_path(set, 10, k, 0.75, 15), set.total_count()});
  }
  return out;
}

/// Work grows with M at fixed N*K. Many sparse series on a long window: the
/// per-sector cost (one range lookup per series) then dominates pair counting.
inline std::vector<ScalingPoint> scaling_vs_m(std::uint64_t seed, const std::vector<std::size_t>& sector_counts) {
  const Interval window{0.0, 1e5};
  const auto model = PiecewiseHawkesModel::stationary(window, 0.005, ExponentialKernel{1.0, 2.0});
  const ObservationSet set = simulate_set(model, window, 200, seed);
  std::vector<ScalingPoint> out;
  for (std::size_t m : sector_counts) {
    out.push_back({static_cast<double>(m), time_g_path(set, m, 8, 0.75, 15), set.total_count()});
  }
  return out;
}

}  // namespace hawkes_mrs
