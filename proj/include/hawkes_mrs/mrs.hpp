#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/cumulants.hpp"

namespace hawkes_mrs {

struct NmseResult {
  double value{0.0};
  bool low_signal{false};  // a histogram had non-positive mass
};

/// Floor on the normalizing denominator 2*h*sum(g).
inline constexpr double kNmseMassFloor = 1e-12;

/// Mean squared difference between the two histograms after each is scaled
/// to unit area on the two-sided lag axis (divide by 2*h*sum).
inline NmseResult nmse_detail(const LagHistogram& a, const LagHistogram& b) {
  if (a.bin_count() != b.bin_count()) throw ValidationError("nmse: bin counts differ");
  const double h = a.bin_width();
  if (std::abs(h - b.bin_width()) > 1e-12 * std::max(h, b.bin_width())) {
    throw ValidationError("nmse: bin widths differ");
  }
  NmseResult r;
  double da = 2.0 * h * a.mass();
  double db = 2.0 * h * b.mass();
  if (da <= kNmseMassFloor) {
    da = kNmseMassFloor;
    r.low_signal = true;
  }
  if (db <= kNmseMassFloor) {
    db = kNmseMassFloor;
    r.low_signal = true;
  }
  auto va = a.values();
  auto vb = b.values();
  double acc = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k) {
    const double d = va[k] / da - vb[k] / db;
    acc += d * d;
  }
  r.value = acc / static_cast<double>(va.size());
  return r;
}

inline double nmse(const LagHistogram& a, const LagHistogram& b) { return nmse_detail(a, b).value; }

struct BoundaryScore {
  double boundary_time{0.0};
  double nmse{0.0};
  bool low_signal{false};
};

/// Multi-resolution output: every candidate cut scored, ranked by NMSE.
struct SegmentationHierarchy {
  std::vector<BoundaryScore> scores;       // in time order
  std::vector<std::size_t> ranking;        // indices into scores, descending NMSE
  std::vector<double> threshold_ratios;    // ratio(R) at index R-1, R = 1..M

  [[nodiscard]] std::size_t sector_count() const noexcept { return scores.size() + 1; }

  /// Rank (1-based) of the boundary stored at scores[i].
  [[nodiscard]] std::size_t rank_of(std::size_t i) const {
    auto it = std::find(ranking.begin(), ranking.end(), i);
    return static_cast<std::size_t>(it - ranking.begin()) + 1;
  }

  /// Boundary time newly added when moving from R-1 to R segments (R >= 2).
  [[nodiscard]] double new_position(std::size_t r) const { return scores[ranking.at(r - 2)].boundary_time; }

  [[nodiscard]] double ratio(std::size_t r) const { return threshold_ratios.at(r - 1); }
};

/// Ranks precomputed boundary scores (in time order) and derives the
/// threshold ratios for M = scores.size() + 1 sectors.
inline SegmentationHierarchy rank_boundaries(std::vector<BoundaryScore> scores) {
  if (scores.empty()) throw ValidationError("hierarchy needs at least two sectors");
  for (const auto& s : scores) {
    if (!(s.nmse >= 0.0) || !std::isfinite(s.nmse)) throw ValidationError("boundary scores must be finite and >= 0");
  }
  SegmentationHierarchy out;
  out.scores = std::move(scores);
  out.ranking.resize(out.scores.size());
  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](std::size_t x, std::size_t y) {
    if (out.scores[x].nmse != out.scores[y].nmse) return out.scores[x].nmse > out.scores[y].nmse;
    return out.scores[x].boundary_time < out.scores[y].boundary_time;
  });

  // ratio(R) = R-th largest NMSE / largest, ratio(M) = 0. With all scores
  // zero the hierarchy carries no information: ratio(1) = 1, the rest 0.
  const std::size_t m = out.scores.size() + 1;
  out.threshold_ratios.assign(m, 0.0);
  out.threshold_ratios[0] = 1.0;
  const double top = out.scores[out.ranking[0]].nmse;
  if (top > 0.0) {
    for (std::size_t r = 2; r < m; ++r) out.threshold_ratios[r - 1] = out.scores[out.ranking[r - 1]].nmse / top;
  }
  return out;
}

inline SegmentationHierarchy build_hierarchy(const std::vector<SectorEstimate>& estimates) {
  if (estimates.size() < 2) throw ValidationError("hierarchy needs at least two sectors");
  std::vector<BoundaryScore> scores;
  scores.reserve(estimates.size() - 1);
  for (std::size_t j = 0; j + 1 < estimates.size(); ++j) {
    auto r = nmse_detail(estimates[j].histogram, estimates[j + 1].histogram);
    scores.push_back({estimates[j].sector.end, r.value, r.low_signal});
  }
  return rank_boundaries(std::move(scores));
}

/// The R-1 highest-ranked cut positions in time order.
inline std::vector<double> segment(const SegmentationHierarchy& hierarchy, std::size_t r) {
  if (r < 1 || r > hierarchy.sector_count()) throw ValidationError("R must lie in [1, M]");
  std::vector<double> cuts;
  cuts.reserve(r - 1);
  for (std::size_t i = 0; i + 1 < r; ++i) cuts.push_back(hierarchy.scores[hierarchy.ranking[i]].boundary_time);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

}  // namespace hawkes_mrs
