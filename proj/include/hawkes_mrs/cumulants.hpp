#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hawkes_mrs/core.hpp"

namespace hawkes_mrs {

/// Per-sector first- and second-order statistics pooled over a set.
struct SectorEstimate {
  std::size_t sector_index{0};
  Interval sector{};
  double lambda_hat{0.0};
  LagHistogram histogram;
  std::size_t event_count{0};
  std::size_t contributing_series{0};
};

/// How pairs whose lag bin runs past the end of the sector are treated.
///  - none:     every event is a reference event for every bin; the bins see
///              a downward bias of about (Lambda + g) * tau / |sector|.
///  - interior: bin k only uses reference events whose whole lag bin lies
///              inside the sector, and is normalized by their count.
enum class EdgeCorrection { none, interior };

struct GOptions {
  EdgeCorrection edge{EdgeCorrection::interior};
};

inline double estimate_lambda(const EventSeries& series, const Interval& interval) {
  if (!(interval.length() > 0.0)) throw ValidationError("zero-length interval");
  if (!interval.within(series.window())) {
    throw ValidationError("interval must lie inside the series window");
  }
  return static_cast<double>(series.count_in(interval)) / interval.length();
}

namespace detail {

// Accumulates ordered-pair counts (i < m) with lag t_m - t_i in bin k for the
// events in `times` lying inside `sector`. `refs[k]` receives the number of
// reference events used for bin k.
inline void count_lag_pairs(std::span<const double> times, const Interval& sector, double h,
                            std::size_t k_bins, EdgeCorrection edge, std::vector<double>& raw,
                            std::vector<double>& refs) {
  raw.assign(k_bins, 0.0);
  refs.assign(k_bins, 0.0);
  const double support = h * static_cast<double>(k_bins);
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = times[i];
    std::size_t usable = k_bins;
    if (edge == EdgeCorrection::interior) {
      const double room = (sector.end - ti) / h;
      usable = room >= static_cast<double>(k_bins) ? k_bins : static_cast<std::size_t>(room);
    }
    if (usable == 0) continue;
    for (std::size_t k = 0; k < usable; ++k) refs[k] += 1.0;
    const double reach = h * static_cast<double>(usable);
    for (std::size_t m = i + 1; m < n; ++m) {
      const double lag = times[m] - ti;
      if (lag >= support || lag >= reach) break;
      const auto k = static_cast<std::size_t>(lag / h);
      if (k < usable) raw[k] += 1.0;
    }
  }
}

}  // namespace detail

/// Empirical second-order statistic of one sector.
///
/// For every series with events in the sector the per-bin estimate is
/// raw_k / (refs_k * h) - n / |sector|, where raw_k counts ordered pairs with
/// lag in [k*h, (k+1)*h). The returned histogram averages these per-series
/// estimates over the series that have events in the sector.
inline SectorEstimate estimate_g(const ObservationSet& set, const Interval& sector, double h,
                                 std::size_t k_bins, GOptions opts = {}) {
  if (k_bins < 1) throw ValidationError("bin count K must be >= 1");
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("bin width h must be positive");
  if (!(sector.length() > 0.0) || !sector.within(set.window())) {
    throw ValidationError("sector must be a non-empty interval inside the window");
  }
  if (!(h * static_cast<double>(k_bins) < sector.length())) {
    throw ValidationError("lag support K*h must be smaller than the sector width");
  }

  std::vector<double> sum(k_bins, 0.0);
  std::vector<double> used(k_bins, 0.0);
  std::vector<double> raw;
  std::vector<double> refs;
  std::size_t pooled = 0;
  std::size_t contributing = 0;
  const double width = sector.length();

  for (const auto& s : set.series()) {
    auto [lo, hi] = s.range(sector);
    const std::size_t n = hi - lo;
    if (n == 0) continue;
    pooled += n;
    ++contributing;
    const double lambda_l = static_cast<double>(n) / width;
    detail::count_lag_pairs(s.times().subspan(lo, n), sector, h, k_bins, opts.edge, raw, refs);
    for (std::size_t k = 0; k < k_bins; ++k) {
      if (refs[k] == 0.0) continue;
      sum[k] += raw[k] / (refs[k] * h) - lambda_l;
      used[k] += 1.0;
    }
  }
  if (pooled == 0) throw ValidationError("degenerate sector: no events in any series");

  std::vector<double> g(k_bins, 0.0);
  for (std::size_t k = 0; k < k_bins; ++k) g[k] = used[k] > 0.0 ? sum[k] / used[k] : 0.0;

  SectorEstimate est;
  est.sector = sector;
  est.lambda_hat =
      static_cast<double>(pooled) / (width * static_cast<double>(set.series_count()));
  est.histogram = LagHistogram(std::move(g), h);
  est.event_count = pooled;
  est.contributing_series = contributing;
  return est;
}

inline std::vector<SectorEstimate> estimate_all_sectors(const ObservationSet& set,
                                                        const SectorGrid& grid, double h,
                                                        std::size_t k_bins, GOptions opts = {}) {
  if (!(grid.window() == set.window())) throw ValidationError("grid and data windows differ");
  std::vector<SectorEstimate> out;
  out.reserve(grid.sector_count());
  for (std::size_t j = 0; j < grid.sector_count(); ++j) {
    try {
      auto e = estimate_g(set, grid.sector(j), h, k_bins, opts);
      e.sector_index = j;
      out.push_back(std::move(e));
    } catch (const ValidationError& err) {
      throw ValidationError("sector " + std::to_string(j) + ": " + err.what());
    }
  }
  return out;
}

}  // namespace hawkes_mrs
