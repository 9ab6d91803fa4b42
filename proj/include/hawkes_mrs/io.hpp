#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/cumulants.hpp"
#include "hawkes_mrs/kernel_recovery.hpp"
#include "hawkes_mrs/mrs.hpp"

namespace hawkes_mrs {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\xEF' ||
                        s.front() == '\xBB' || s.front() == '\xBF')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Event CSV: series_id,timestamp
// ---------------------------------------------------------------------------

/// Raw rows grouped by series id, in order of first appearance.
struct EventTable {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> times;

  [[nodiscard]] std::size_t total() const {
    std::size_t n = 0;
    for (const auto& t : times) n += t.size();
    return n;
  }
};

inline EventTable read_event_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("event CSV is empty");
  auto header = detail::split_csv_line(detail::trim(line));
  if (header.size() != 2 || detail::trim(header[0]) != "series_id" ||
      detail::trim(header[1]) != "timestamp") {
    throw ValidationError("event CSV header must be 'series_id,timestamp'");
  }
  EventTable table;
  std::map<std::string, std::size_t, std::less<>> index;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto cells = detail::split_csv_line(trimmed);
    if (cells.size() != 2) {
      throw ValidationError("event CSV row " + std::to_string(row) + ": expected 2 columns");
    }
    std::string id(detail::trim(cells[0]));
    double t = 0.0;
    try {
      t = parse_double(cells[1]);
    } catch (const ValidationError& e) {
      throw ValidationError("event CSV row " + std::to_string(row) + ": " + e.what());
    }
    auto it = index.find(id);
    if (it == index.end()) {
      it = index.emplace(id, table.ids.size()).first;
      table.ids.push_back(id);
      table.times.emplace_back();
    }
    table.times[it->second].push_back(t);
  }
  if (table.ids.empty()) throw ValidationError("event CSV has no rows");
  return table;
}

/// Smallest window [0, T) holding every event, T rounded up to an integer.
inline Interval infer_window(const EventTable& table) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& ts : table.times) {
    for (double t : ts) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  double end = std::floor(hi) + 1.0;
  return {std::floor(lo), end};
}

inline ObservationSet to_observation_set(const EventTable& table, Interval window,
                                         JitterPolicy jitter = {}) {
  std::vector<EventSeries> series;
  series.reserve(table.times.size());
  for (std::size_t l = 0; l < table.times.size(); ++l) {
    try {
      series.push_back(validate_series(table.times[l], window, jitter));
    } catch (const ValidationError& e) {
      throw ValidationError("series '" + table.ids[l] + "': " + e.what());
    }
  }
  return ObservationSet(std::move(series));
}

inline void write_events_csv(std::ostream& out, const ObservationSet& set) {
  out << "series_id,timestamp\n";
  for (std::size_t l = 0; l < set.series_count(); ++l) {
    for (double t : set.series()[l].times()) out << l << ',' << format_double(t) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Estimator outputs
// ---------------------------------------------------------------------------

inline void write_histograms_csv(std::ostream& out, const std::vector<SectorEstimate>& estimates) {
  out << "sector_index,bin_index,lag_midpoint,g_value\n";
  for (const auto& e : estimates) {
    const auto& h = e.histogram;
    for (std::size_t k = 0; k < h.bin_count(); ++k) {
      out << e.sector_index << ',' << k << ',' << format_double(h.midpoint(k)) << ','
          << format_double(h.values()[k]) << '\n';
    }
  }
}

/// Raw and smoothed curves in one file; `smoothed` is 0 or 1.
inline void write_g_curves_csv(std::ostream& out, const std::vector<SectorEstimate>& raw,
                               const std::vector<SectorEstimate>& smoothed) {
  out << "sector_index,bin_index,lag_midpoint,g_value,smoothed\n";
  auto emit = [&](const std::vector<SectorEstimate>& es, int flag) {
    for (const auto& e : es) {
      const auto& h = e.histogram;
      for (std::size_t k = 0; k < h.bin_count(); ++k) {
        out << e.sector_index << ',' << k << ',' << format_double(h.midpoint(k)) << ','
            << format_double(h.values()[k]) << ',' << flag << '\n';
      }
    }
  };
  emit(raw, 0);
  emit(smoothed, 1);
}

inline void write_hierarchy_csv(std::ostream& out, const SegmentationHierarchy& h) {
  out << "boundary_time,nmse,rank\n";
  for (std::size_t i = 0; i < h.scores.size(); ++i) {
    out << format_double(h.scores[i].boundary_time) << ',' << format_double(h.scores[i].nmse) << ','
        << h.rank_of(i) << '\n';
  }
}

inline void write_segments_csv(std::ostream& out, const std::vector<SegmentFit>& fits) {
  out << "segment_start,segment_end,mu_hat,branching_ratio\n";
  for (const auto& f : fits) {
    out << format_double(f.segment.start) << ',' << format_double(f.segment.end) << ','
        << (f.stable ? format_double(f.mu_hat) : std::string("nan")) << ','
        << format_double(f.branching_ratio) << '\n';
  }
}

/// Kernel curves at the Nystrom nodes.
inline void write_kernel_curves_csv(std::ostream& out, const std::vector<SegmentFit>& fits) {
  out << "segment_index,lag,phi_hat\n";
  for (std::size_t s = 0; s < fits.size(); ++s) {
    const auto& k = fits[s].kernel;
    for (std::size_t q = 0; q < k.values().size(); ++q) {
      out << s << ',' << format_double(k.node(q)) << ',' << format_double(k.values()[q]) << '\n';
    }
  }
}

}  // namespace hawkes_mrs
