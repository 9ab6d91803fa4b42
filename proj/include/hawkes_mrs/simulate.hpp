#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/random.hpp"

namespace hawkes_mrs {

namespace detail {

// mu_p + sum over past events within the support of phi_p(t - t_i). Events at
// exactly t are included when `inclusive` is set (right limit of lambda).
inline double piece_intensity(const HawkesPiece& piece, std::span<const double> events, double t,
                              bool inclusive) {
  const double a = piece.kernel.support();
  auto lo = std::lower_bound(events.begin(), events.end(), t - a);
  auto hi = inclusive ? std::upper_bound(lo, events.end(), t) : std::lower_bound(lo, events.end(), t);
  double lam = piece.mu;
  for (auto it = lo; it != hi; ++it) lam += piece.kernel(t - *it);
  return lam;
}

}  // namespace detail

/// Ogata thinning for a piecewise Hawkes model.
///
/// Within a piece and between events the intensity is non-increasing for
/// non-increasing kernels, so the right limit of lambda at the current time
/// bounds it until the next event or piece boundary. The bound is refreshed
/// after every candidate and at each boundary.
inline EventSeries simulate(const PiecewiseHawkesModel& model, Interval window, std::uint64_t seed) {
  require_valid_window(window);
  if (!window.within(model.span())) {
    throw ValidationError("simulation window must lie inside the model's breakpoints");
  }
  for (const auto& p : model.pieces()) {
    if (!p.kernel.non_increasing()) {
      throw ValidationError("thinning requires non-increasing kernels");
    }
  }

  Rng rng(seed);
  std::vector<double> events;
  const auto& breaks = model.breakpoints();
  double t = window.start;
  while (t < window.end) {
    const std::size_t p = model.piece_index(t);
    const HawkesPiece& piece = model.pieces()[p];
    const double next_boundary = std::min(breaks[p + 1], window.end);
    const double bound = detail::piece_intensity(piece, events, t, true);
    const double cand = t + rng.exponential(bound);
    if (cand >= next_boundary) {
      t = next_boundary;
      continue;
    }
    const double lam = detail::piece_intensity(piece, events, cand, false);
    if (rng.uniform() * bound <= lam) events.push_back(cand);
    t = cand;
  }
  return EventSeries(window, std::move(events));
}

/// L independent realizations; series l uses derive_seed(seed, l).
inline ObservationSet simulate_set(const PiecewiseHawkesModel& model, Interval window,
                                   std::size_t count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("series count must be >= 1");
  std::vector<EventSeries> out;
  out.reserve(count);
  for (std::size_t l = 0; l < count; ++l) out.push_back(simulate(model, window, derive_seed(seed, l)));
  return ObservationSet(std::move(out));
}

}  // namespace hawkes_mrs
