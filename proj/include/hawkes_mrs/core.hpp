#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hawkes_mrs {

// Errors come in two flavours so callers (the CLI in particular) can tell bad
// input apart from a numerical breakdown.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Half-open time interval [start, end).
struct Interval {
  double start{0.0};
  double end{0.0};

  [[nodiscard]] double length() const noexcept { return end - start; }
  [[nodiscard]] bool contains(double t) const noexcept { return t >= start && t < end; }
  [[nodiscard]] bool within(const Interval& outer) const noexcept {
    return start >= outer.start && end <= outer.end;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline void require_valid_window(const Interval& w) {
  if (!std::isfinite(w.start) || !std::isfinite(w.end) || !(w.end > w.start)) {
    throw ValidationError("empty or non-finite observation window [" + std::to_string(w.start) +
                          ", " + std::to_string(w.end) + ")");
  }
}

// ---------------------------------------------------------------------------
// EventSeries
// ---------------------------------------------------------------------------

/// One realization: strictly increasing event times inside a window.
class EventSeries {
 public:
  EventSeries() = default;

  EventSeries(Interval window, std::vector<double> timestamps)
      : window_(window), times_(std::move(timestamps)) {
    require_valid_window(window_);
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double t = times_[i];
      if (!std::isfinite(t)) throw ValidationError("non-finite timestamp");
      if (!window_.contains(t)) {
        throw ValidationError("timestamp " + std::to_string(t) + " outside observation window");
      }
      if (i > 0 && !(t > times_[i - 1])) {
        throw ValidationError("timestamps must be strictly increasing");
      }
    }
  }

  [[nodiscard]] const Interval& window() const noexcept { return window_; }
  [[nodiscard]] std::span<const double> times() const noexcept { return times_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
  [[nodiscard]] bool empty() const noexcept { return times_.empty(); }

  /// Index range [first, last) of events falling in `iv`.
  [[nodiscard]] std::pair<std::size_t, std::size_t> range(const Interval& iv) const {
    auto lo = std::lower_bound(times_.begin(), times_.end(), iv.start);
    auto hi = std::lower_bound(lo, times_.end(), iv.end);
    return {static_cast<std::size_t>(lo - times_.begin()),
            static_cast<std::size_t>(hi - times_.begin())};
  }

  [[nodiscard]] std::size_t count_in(const Interval& iv) const {
    auto [lo, hi] = range(iv);
    return hi - lo;
  }

 private:
  Interval window_{0.0, 1.0};
  std::vector<double> times_;
};

/// Tie handling for raw records. A NaN epsilon selects the default of
/// 1e-6 times the mean inter-event gap (window length / event count).
struct JitterPolicy {
  double epsilon{std::numeric_limits<double>::quiet_NaN()};
};

/// Sorts raw records, rejects out-of-window or non-finite values and
/// separates simultaneous records by cumulative jitter.
inline EventSeries validate_series(std::vector<double> raw, Interval window,
                                   JitterPolicy jitter = {}) {
  require_valid_window(window);
  for (double t : raw) {
    if (!std::isfinite(t)) throw ValidationError("non-finite timestamp");
    if (!window.contains(t)) {
      throw ValidationError("timestamp " + std::to_string(t) + " outside observation window");
    }
  }
  std::sort(raw.begin(), raw.end());
  if (raw.size() > 1) {
    double eps = jitter.epsilon;
    if (std::isnan(eps)) eps = 1e-6 * window.length() / static_cast<double>(raw.size());
    if (!(eps > 0.0)) throw ValidationError("jitter epsilon must be positive");
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (raw[i] <= raw[i - 1]) raw[i] = raw[i - 1] + eps;
    }
    if (!window.contains(raw.back())) {
      throw ValidationError("tie jitter pushed an event past the window end");
    }
  }
  return EventSeries(window, std::move(raw));
}

// ---------------------------------------------------------------------------
// ObservationSet
// ---------------------------------------------------------------------------

/// L independent realizations sharing one window.
class ObservationSet {
 public:
  explicit ObservationSet(std::vector<EventSeries> series) : series_(std::move(series)) {
    if (series_.empty()) throw ValidationError("observation set needs at least one series");
    window_ = series_.front().window();
    for (const auto& s : series_) {
      if (!(s.window() == window_)) throw ValidationError("series windows differ");
      total_ += s.size();
    }
  }

  [[nodiscard]] const Interval& window() const noexcept { return window_; }
  [[nodiscard]] const std::vector<EventSeries>& series() const noexcept { return series_; }
  [[nodiscard]] std::size_t series_count() const noexcept { return series_.size(); }
  [[nodiscard]] std::size_t total_count() const noexcept { return total_; }

 private:
  std::vector<EventSeries> series_;
  Interval window_{};
  std::size_t total_{0};
};

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// Default truncation lag: where alpha*exp(-beta*tau) drops below 1e-6*alpha.
inline double default_exponential_support(double beta) { return std::log(1e6) / beta; }

/// alpha * exp(-beta * tau) on [0, support], zero beyond.
struct ExponentialKernel {
  double alpha{0.0};
  double beta{1.0};
  double support{std::numeric_limits<double>::quiet_NaN()};
};

/// Kernel values at midpoint nodes tau_q = (q - 1/2) * step, q = 1..Q.
/// Values may be negative here (raw recovery output); see TriggeringKernel.
class TabulatedKernel {
 public:
  TabulatedKernel() = default;
  TabulatedKernel(std::vector<double> values, double step) : values_(std::move(values)), step_(step) {
    if (values_.empty()) throw ValidationError("tabulated kernel needs at least one node");
    if (!(step_ > 0.0) || !std::isfinite(step_)) throw ValidationError("kernel step must be positive");
    for (double v : values_) {
      if (!std::isfinite(v)) throw ValidationError("tabulated kernel values must be finite");
    }
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double step() const noexcept { return step_; }
  [[nodiscard]] std::size_t node_count() const noexcept { return values_.size(); }
  [[nodiscard]] double node(std::size_t q) const noexcept {
    return (static_cast<double>(q) + 0.5) * step_;
  }
  [[nodiscard]] double support() const noexcept {
    return static_cast<double>(values_.size()) * step_;
  }

  /// Linear interpolation between nodes. The first half cell extrapolates
  /// the first segment without crossing zero, the last half cell is constant,
  /// and the kernel is zero outside [0, support].
  [[nodiscard]] double operator()(double tau) const noexcept {
    if (tau < 0.0 || tau > support()) return 0.0;
    const double x = tau / step_ - 0.5;
    if (x <= 0.0) {
      const double v0 = values_.front();
      if (values_.size() < 2) return v0;
      const double v = v0 + x * (values_[1] - v0);
      return v0 >= 0.0 ? std::max(v, 0.0) : std::min(v, 0.0);
    }
    const auto q = static_cast<std::size_t>(x);
    if (q + 1 >= values_.size()) return values_.back();
    const double w = x - static_cast<double>(q);
    return (1.0 - w) * values_[q] + w * values_[q + 1];
  }

  /// Midpoint-rule integral; equals the exact integral of the interpolant.
  [[nodiscard]] double integral() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * step_;
  }

  [[nodiscard]] TabulatedKernel clamped_nonnegative() const {
    std::vector<double> v(values_);
    for (double& x : v) x = std::max(x, 0.0);
    return TabulatedKernel(std::move(v), step_);
  }

 private:
  std::vector<double> values_{0.0};
  double step_{1.0};
};

/// Non-negative triggering kernel with finite support.
class TriggeringKernel {
 public:
  TriggeringKernel() : TriggeringKernel(ExponentialKernel{0.0, 1.0}) {}

  TriggeringKernel(ExponentialKernel k) {  // NOLINT(google-explicit-constructor)
    if (!(k.alpha >= 0.0) || !std::isfinite(k.alpha)) throw ValidationError("alpha must be >= 0");
    if (!(k.beta > 0.0) || !std::isfinite(k.beta)) throw ValidationError("beta must be > 0");
    if (std::isnan(k.support)) k.support = default_exponential_support(k.beta);
    if (!(k.support > 0.0)) throw ValidationError("kernel support must be positive");
    form_ = k;
    build_cumulative();
  }

  TriggeringKernel(TabulatedKernel k) {  // NOLINT(google-explicit-constructor)
    for (double v : k.values()) {
      if (v < 0.0) throw ValidationError("triggering kernel values must be >= 0");
    }
    form_ = std::move(k);
    build_cumulative();
  }

  [[nodiscard]] bool is_exponential() const noexcept {
    return std::holds_alternative<ExponentialKernel>(form_);
  }
  [[nodiscard]] const ExponentialKernel* exponential() const noexcept {
    return std::get_if<ExponentialKernel>(&form_);
  }
  [[nodiscard]] const TabulatedKernel* tabulated() const noexcept {
    return std::get_if<TabulatedKernel>(&form_);
  }

  [[nodiscard]] double support() const noexcept {
    if (const auto* e = exponential()) return e->support;
    return tabulated()->support();
  }

  /// phi(tau) for tau >= 0; zero outside [0, support].
  [[nodiscard]] double operator()(double tau) const noexcept {
    if (const auto* e = exponential()) {
      if (tau < 0.0 || tau > e->support) return 0.0;
      return e->alpha * std::exp(-e->beta * tau);
    }
    return (*tabulated())(tau);
  }

  /// Integral of phi over lags [a, b], clipped to [0, support]. Exponential
  /// kernels use the closed form; tabulated kernels use a trapezoid table with
  /// step = node spacing / 4.
  [[nodiscard]] double integral(double a, double b) const noexcept {
    a = std::max(a, 0.0);
    b = std::min(b, support());
    if (!(b > a)) return 0.0;
    if (const auto* e = exponential()) {
      return e->alpha / e->beta * (std::exp(-e->beta * a) - std::exp(-e->beta * b));
    }
    return cumulative(b) - cumulative(a);
  }

  /// Trapezoid quadrature of phi over [a, b] with the given maximum step;
  /// available for every form (used to cross-check closed forms).
  [[nodiscard]] double integral_trapezoid(double a, double b, double max_step) const {
    a = std::max(a, 0.0);
    b = std::min(b, support());
    if (!(b > a)) return 0.0;
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / max_step));
    const double s = (b - a) / static_cast<double>(n);
    double acc = 0.5 * ((*this)(a) + (*this)(b));
    for (std::size_t i = 1; i < n; ++i) acc += (*this)(a + s * static_cast<double>(i));
    return acc * s;
  }

  /// Integral over all lags: alpha/beta for the exponential form (independent
  /// of the evaluation cutoff), the midpoint rule over the nodes otherwise.
  [[nodiscard]] double branching_ratio() const noexcept {
    if (const auto* e = exponential()) return e->alpha / e->beta;
    return tabulated()->integral();
  }

  [[nodiscard]] bool non_increasing() const noexcept {
    if (exponential()) return true;
    auto v = tabulated()->values();
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[i - 1]) return false;
    }
    return true;
  }

 private:
  void build_cumulative() {
    cum_.clear();
    const auto* t = tabulated();
    if (!t) return;
    cum_step_ = t->step() / 4.0;
    const std::size_t n = 4 * t->node_count();
    cum_.resize(n + 1);
    cum_[0] = 0.0;
    double prev = (*t)(0.0);
    for (std::size_t i = 1; i <= n; ++i) {
      const double cur = (*t)(cum_step_ * static_cast<double>(i));
      cum_[i] = cum_[i - 1] + 0.5 * cum_step_ * (prev + cur);
      prev = cur;
    }
  }

  [[nodiscard]] double cumulative(double x) const noexcept {
    const double pos = x / cum_step_;
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cum_.size()) return cum_.back();
    // the interpolant is linear inside each quarter cell
    const double a = cum_step_ * static_cast<double>(i);
    const double fa = (*tabulated())(a);
    const double fx = (*tabulated())(x);
    return cum_[i] + 0.5 * (x - a) * (fa + fx);
  }

  std::variant<ExponentialKernel, TabulatedKernel> form_;
  std::vector<double> cum_;
  double cum_step_{1.0};
};

// ---------------------------------------------------------------------------
// PiecewiseHawkesModel
// ---------------------------------------------------------------------------

struct HawkesPiece {
  double mu{1.0};
  TriggeringKernel kernel;
};

/// Baseline and kernel held constant on each interval [b_p, b_{p+1}).
/// The intensity at time t uses the piece containing t for both the baseline
/// and the kernel applied to all past events.
class PiecewiseHawkesModel {
 public:
  PiecewiseHawkesModel(std::vector<double> breakpoints, std::vector<HawkesPiece> pieces)
      : breaks_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw ValidationError("model needs at least one piece");
    if (breaks_.size() != pieces_.size() + 1) {
      throw ValidationError("model needs exactly one more breakpoint than pieces");
    }
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
      if (!std::isfinite(breaks_[i])) throw ValidationError("non-finite breakpoint");
      if (i > 0 && !(breaks_[i] > breaks_[i - 1])) {
        throw ValidationError("breakpoints must be strictly increasing");
      }
    }
    for (const auto& p : pieces_) {
      if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw ValidationError("baseline mu must be > 0");
      if (!(p.kernel.branching_ratio() < 1.0)) {
        throw ValidationError("unstable piece: kernel integral must be < 1");
      }
    }
  }

  static PiecewiseHawkesModel stationary(Interval window, double mu, TriggeringKernel kernel) {
    return PiecewiseHawkesModel({window.start, window.end}, {HawkesPiece{mu, std::move(kernel)}});
  }

  [[nodiscard]] Interval span() const noexcept { return {breaks_.front(), breaks_.back()}; }
  [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  [[nodiscard]] const std::vector<HawkesPiece>& pieces() const noexcept { return pieces_; }
  [[nodiscard]] std::size_t piece_count() const noexcept { return pieces_.size(); }

  [[nodiscard]] Interval piece_interval(std::size_t p) const noexcept {
    return {breaks_[p], breaks_[p + 1]};
  }

  /// Piece containing t (right-continuous); times past the end map to the last piece.
  [[nodiscard]] std::size_t piece_index(double t) const noexcept {
    auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, t);
    return static_cast<std::size_t>(it - (breaks_.begin() + 1));
  }

  [[nodiscard]] double max_support() const noexcept {
    double a = 0.0;
    for (const auto& p : pieces_) a = std::max(a, p.kernel.support());
    return a;
  }

  /// Stationary mean rate of piece p: mu / (1 - integral of phi).
  [[nodiscard]] double stationary_rate(std::size_t p) const noexcept {
    return pieces_[p].mu / (1.0 - pieces_[p].kernel.branching_ratio());
  }

 private:
  std::vector<double> breaks_;
  std::vector<HawkesPiece> pieces_;
};

// ---------------------------------------------------------------------------
// Histograms and sector grids
// ---------------------------------------------------------------------------

/// Second-order statistic on positive lags: bin k covers [k*h, (k+1)*h).
class LagHistogram {
 public:
  LagHistogram() = default;
  LagHistogram(std::vector<double> values, double bin_width)
      : values_(std::move(values)), h_(bin_width) {
    if (values_.empty()) throw ValidationError("histogram needs at least one bin");
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw ValidationError("bin width must be positive");
    for (double v : values_) {
      if (!std::isfinite(v)) throw ValidationError("histogram values must be finite");
    }
  }

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] double bin_width() const noexcept { return h_; }
  [[nodiscard]] std::size_t bin_count() const noexcept { return values_.size(); }
  [[nodiscard]] double support() const noexcept {
    return h_ * static_cast<double>(values_.size());
  }
  [[nodiscard]] double midpoint(std::size_t k) const noexcept {
    return (static_cast<double>(k) + 0.5) * h_;
  }
  [[nodiscard]] double mass() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  /// Piecewise-linear curve through the bin midpoints, held constant in the
  /// outer half bins and zero beyond the support. Even in tau.
  [[nodiscard]] double interpolate(double tau) const noexcept {
    tau = std::abs(tau);
    if (tau > support()) return 0.0;
    const double x = tau / h_ - 0.5;
    if (x <= 0.0) return values_.front();
    const auto k = static_cast<std::size_t>(x);
    if (k + 1 >= values_.size()) return values_.back();
    const double w = x - static_cast<double>(k);
    return (1.0 - w) * values_[k] + w * values_[k + 1];
  }

 private:
  std::vector<double> values_{0.0};
  double h_{1.0};
};

/// M uniform sectors over a window.
class SectorGrid {
 public:
  SectorGrid(Interval window, std::size_t sector_count) : window_(window), m_(sector_count) {
    require_valid_window(window_);
    if (m_ < 2) throw ValidationError("sector count M must be >= 2");
  }

  [[nodiscard]] const Interval& window() const noexcept { return window_; }
  [[nodiscard]] std::size_t sector_count() const noexcept { return m_; }
  [[nodiscard]] double sector_width() const noexcept {
    return window_.length() / static_cast<double>(m_);
  }
  [[nodiscard]] Interval sector(std::size_t j) const noexcept {
    const double w = sector_width();
    const double a = window_.start + w * static_cast<double>(j);
    const double b = (j + 1 == m_) ? window_.end : window_.start + w * static_cast<double>(j + 1);
    return {a, b};
  }
  /// The M-1 interior cut candidates.
  [[nodiscard]] std::vector<double> boundaries() const {
    std::vector<double> b;
    b.reserve(m_ - 1);
    for (std::size_t j = 0; j + 1 < m_; ++j) b.push_back(sector(j).end);
    return b;
  }
  /// True when every sector is wider than the lag support K*h.
  [[nodiscard]] bool resolves(double lag_support) const noexcept {
    return sector_width() > lag_support;
  }

 private:
  Interval window_;
  std::size_t m_;
};

}  // namespace hawkes_mrs
