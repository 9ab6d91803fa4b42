#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/kernel_recovery.hpp"
#include "hawkes_mrs/random.hpp"
#include "hawkes_mrs/simulate.hpp"

namespace hawkes_mrs {

/// How integrals of the triggering kernels are evaluated. `automatic` uses the
/// closed form for exponential kernels and the exact trapezoid table (step
/// = node spacing / 4) for tabulated ones; `trapezoid` forces quadrature with
/// the given step for every kernel.
struct IntegralMethod {
  enum class Kind { automatic, trapezoid } kind{Kind::automatic};
  double step{1e-3};
};

namespace detail {

// Integral over t in [lo, hi] of phi_{p(t)}(t - tj), split at piece boundaries.
inline double kernel_mass(const PiecewiseHawkesModel& model, double tj, double lo, double hi,
                          const IntegralMethod& method) {
  lo = std::max(lo, tj);
  if (!(hi > lo)) return 0.0;
  double acc = 0.0;
  for (std::size_t p = model.piece_index(lo); p < model.piece_count(); ++p) {
    const Interval piv = model.piece_interval(p);
    if (piv.start >= hi) break;
    const double a = std::max(lo, piv.start);
    const double b = std::min(hi, piv.end);
    if (!(b > a)) continue;
    const auto& k = model.pieces()[p].kernel;
    if (a - tj > k.support()) continue;
    acc += method.kind == IntegralMethod::Kind::trapezoid
               ? k.integral_trapezoid(a - tj, b - tj, method.step)
               : k.integral(a - tj, b - tj);
  }
  return acc;
}

// Integral of the baseline over [lo, hi].
inline double baseline_mass(const PiecewiseHawkesModel& model, double lo, double hi) {
  double acc = 0.0;
  for (std::size_t p = model.piece_index(lo); p < model.piece_count(); ++p) {
    const Interval piv = model.piece_interval(p);
    const double a = std::max(lo, piv.start);
    if (a >= hi) break;
    const double b = std::min(hi, piv.end);
    if (b > a) acc += model.pieces()[p].mu * (b - a);
  }
  return acc;
}

// Integral of lambda over [a, b] given the events strictly before b.
inline double intensity_mass(const PiecewiseHawkesModel& model, std::span<const double> events,
                             double a, double b, const IntegralMethod& method) {
  double acc = baseline_mass(model, a, b);
  const double reach = model.max_support();
  auto first = std::lower_bound(events.begin(), events.end(), a - reach);
  auto last = std::lower_bound(first, events.end(), b);
  for (auto it = first; it != last; ++it) acc += kernel_mass(model, *it, a, b, method);
  return acc;
}

inline void require_covers(const PiecewiseHawkesModel& model, const Interval& window) {
  if (!window.within(model.span())) {
    throw ValidationError("model breakpoints do not cover the observation window");
  }
}

}  // namespace detail

/// lambda(t) under the current-time rule, counting events strictly before t.
inline double intensity(const PiecewiseHawkesModel& model, std::span<const double> events, double t) {
  return detail::piece_intensity(model.pieces()[model.piece_index(t)], events, t, false);
}

/// Lambda(t_i) - Lambda(t_{i-1}) for every event (t_0 = window start), plus
/// a final entry for the gap between the last event and the window end.
inline std::vector<double> compensator_increments(const EventSeries& series,
                                                  const PiecewiseHawkesModel& model,
                                                  IntegralMethod method = {}) {
  detail::require_covers(model, series.window());
  auto ev = series.times();
  std::vector<double> out;
  out.reserve(ev.size() + 1);
  double prev = series.window().start;
  for (std::size_t i = 0; i <= ev.size(); ++i) {
    const double t = i < ev.size() ? ev[i] : series.window().end;
    out.push_back(detail::intensity_mass(model, ev.first(i), prev, t, method));
    prev = t;
  }
  return out;
}

/// Integral of lambda over the series window.
inline double integrated_intensity(const EventSeries& series, const PiecewiseHawkesModel& model,
                                   IntegralMethod method = {}) {
  detail::require_covers(model, series.window());
  const auto w = series.window();
  auto ev = series.times();
  double acc = detail::baseline_mass(model, w.start, w.end);
  const double reach = model.max_support();
  for (double t : ev) acc += detail::kernel_mass(model, t, t, std::min(w.end, t + reach), method);
  return acc;
}

inline double log_likelihood(const EventSeries& series, const PiecewiseHawkesModel& model,
                             IntegralMethod method = {}) {
  detail::require_covers(model, series.window());
  auto ev = series.times();
  double acc = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    const double lam = intensity(model, ev.first(i), ev[i]);
    if (!(lam > 0.0)) {
      throw ValidationError("invalid model: intensity is not positive at t = " + std::to_string(ev[i]));
    }
    acc += std::log(lam);
  }
  return acc - integrated_intensity(series, model, method);
}

inline double log_likelihood(const ObservationSet& set, const PiecewiseHawkesModel& model,
                             IntegralMethod method = {}) {
  double acc = 0.0;
  for (const auto& s : set.series()) acc += log_likelihood(s, model, method);
  return acc;
}

// ---------------------------------------------------------------------------
// Stationary exponential-kernel MLE
// ---------------------------------------------------------------------------

struct ExpHawkesParams {
  double mu{1.0};
  double alpha{0.0};
  double beta{1.0};

  [[nodiscard]] double branching_ratio() const noexcept { return alpha / beta; }
};

struct ExpLikelihood {
  double value{0.0};
  std::array<double, 3> gradient{};  // d/d(mu, alpha, beta)
};

/// Log-likelihood of the untruncated stationary exponential model with its
/// analytic gradient, via the usual O(n) recursion.
inline ExpLikelihood exp_log_likelihood(const ObservationSet& set, const ExpHawkesParams& p) {
  ExpLikelihood out;
  auto& g = out.gradient;
  for (const auto& s : set.series()) {
    const double t0 = s.window().start;
    const double t_end = s.window().end;
    auto ev = s.times();
    double r = 0.0;
    double dr = 0.0;
    double prev = t0;
    for (std::size_t i = 0; i < ev.size(); ++i) {
      if (i > 0) {
        const double d = ev[i] - prev;
        const double e = std::exp(-p.beta * d);
        dr = e * (dr - d * (1.0 + r));
        r = e * (1.0 + r);
      }
      prev = ev[i];
      const double lam = p.mu + p.alpha * r;
      out.value += std::log(lam);
      g[0] += 1.0 / lam;
      g[1] += r / lam;
      g[2] += p.alpha * dr / lam;

      const double rem = t_end - ev[i];
      const double e_end = std::exp(-p.beta * rem);
      const double tail = 1.0 - e_end;
      out.value -= p.alpha / p.beta * tail;
      g[1] -= tail / p.beta;
      g[2] += p.alpha / (p.beta * p.beta) * tail - p.alpha / p.beta * rem * e_end;
    }
    const double span = t_end - t0;
    out.value -= p.mu * span;
    g[0] -= span;
  }
  return out;
}

inline PiecewiseHawkesModel to_model(const ExpHawkesParams& p, Interval window) {
  return PiecewiseHawkesModel::stationary(window, p.mu, ExponentialKernel{p.alpha, p.beta});
}

struct MleOptions {
  std::size_t starts{5};
  std::uint64_t seed{20190810};
  std::size_t max_iterations{500};
  double gradient_tolerance{1e-6};  // on the per-event objective, log-parameters
  double start_spread{0.5};         // sd of log-normal perturbation of starts
};

struct MleResult {
  ExpHawkesParams params{};
  double log_likelihood{-std::numeric_limits<double>::infinity()};
  bool converged{false};
  double gradient_norm{std::numeric_limits<double>::infinity()};
  std::size_t iterations{0};
  std::size_t converged_starts{0};
};

namespace detail {

struct LogObjective {
  const ObservationSet& set;
  double scale;

  // f = -loglik / n over x = log(mu, alpha, beta); returns f and its gradient.
  double operator()(const Eigen::Vector3d& x, Eigen::Vector3d& grad) const {
    const ExpHawkesParams p{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
    const auto ll = exp_log_likelihood(set, p);
    grad[0] = -ll.gradient[0] * p.mu / scale;
    grad[1] = -ll.gradient[1] * p.alpha / scale;
    grad[2] = -ll.gradient[2] * p.beta / scale;
    return -ll.value / scale;
  }
};

// BFGS with Armijo backtracking on the log-parameterized objective.
inline MleResult bfgs_from(const LogObjective& f, Eigen::Vector3d x, const MleOptions& opt) {
  Eigen::Vector3d g;
  double fx = f(x, g);
  Eigen::Matrix3d hinv = Eigen::Matrix3d::Identity();
  MleResult res;
  std::size_t it = 0;
  int stalled = 0;
  for (; it < opt.max_iterations; ++it) {
    if (!std::isfinite(fx)) break;
    if (g.cwiseAbs().maxCoeff() < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    Eigen::Vector3d dir = -hinv * g;
    if (dir.dot(g) >= 0.0) {
      hinv.setIdentity();
      dir = -g;
    }
    const double max_step = dir.cwiseAbs().maxCoeff();
    double step = max_step > 2.0 ? 2.0 / max_step : 1.0;
    Eigen::Vector3d xn;
    Eigen::Vector3d gn;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * dir;
      fn = f(xn, gn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * dir.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // no further decrease is representable; judge convergence on the gradient
      res.converged = g.cwiseAbs().maxCoeff() < 1e3 * opt.gradient_tolerance;
      break;
    }
    // progress below roundoff of the objective: stop and judge on the gradient
    if (fx - fn <= 1e-15 * std::abs(fx)) {
      if (++stalled >= 3) {
        x = xn;
        g = gn;
        fx = fn;
        res.converged = g.cwiseAbs().maxCoeff() < 1e2 * opt.gradient_tolerance;
        break;
      }
    } else {
      stalled = 0;
    }
    const Eigen::Vector3d s = xn - x;
    const Eigen::Vector3d y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-16) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d i3 = Eigen::Matrix3d::Identity();
      hinv = (i3 - rho * s * y.transpose()) * hinv * (i3 - rho * y * s.transpose()) +
             rho * s * s.transpose();
    }
    x = xn;
    g = gn;
    fx = fn;
  }
  res.iterations = it;
  res.params = {std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
  res.log_likelihood = -fx * f.scale;
  res.gradient_norm = g.cwiseAbs().maxCoeff();
  return res;
}

// Branching-ratio guess from the dispersion of window counts: for a Hawkes
// process Var/Mean of long-window counts tends to 1 / (1 - n)^2.
inline double moment_branching_guess(const ObservationSet& set, double rate) {
  const double width = std::max(10.0 / std::max(rate, 1e-12), set.window().length() / 50.0);
  std::vector<double> counts;
  for (const auto& s : set.series()) {
    for (double a = s.window().start; a + width <= s.window().end; a += width) {
      counts.push_back(static_cast<double>(s.count_in({a, a + width})));
    }
  }
  if (counts.size() < 2) return 0.3;
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= static_cast<double>(counts.size() - 1);
  if (!(mean > 0.0)) return 0.3;
  const double fano = var / mean;
  return std::clamp(1.0 - 1.0 / std::sqrt(std::max(fano, 1.0)), 0.05, 0.9);
}

}  // namespace detail

/// Maximum-likelihood fit of (mu, alpha, beta) for the stationary exponential
/// model, multi-started around a method-of-moments guess.
inline MleResult fit_exponential_mle(const ObservationSet& set, const MleOptions& opt = {}) {
  if (set.total_count() < 10) throw ValidationError("MLE needs at least 10 events");
  const double span = set.window().length() * static_cast<double>(set.series_count());
  const double rate = static_cast<double>(set.total_count()) / span;
  const double b0 = detail::moment_branching_guess(set, rate);
  const double beta0 = 1.0;
  const Eigen::Vector3d x0(std::log(rate * (1.0 - b0)), std::log(b0 * beta0), std::log(beta0));

  detail::LogObjective f{set, static_cast<double>(set.total_count())};
  Rng rng(opt.seed);
  MleResult best;
  std::size_t converged = 0;
  for (std::size_t s = 0; s < std::max<std::size_t>(opt.starts, 1); ++s) {
    Eigen::Vector3d x = x0;
    if (s > 0) {
      for (int d = 0; d < 3; ++d) x[d] += opt.start_spread * rng.normal();
    }
    MleResult r = detail::bfgs_from(f, x, opt);
    if (r.converged) ++converged;
    const bool better = (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.log_likelihood > best.log_likelihood);
    if (better) best = r;
  }
  best.converged_starts = converged;
  if (!best.converged) throw NumericalError("exponential MLE did not converge from any start");
  return best;
}

// ---------------------------------------------------------------------------
// Model comparison
// ---------------------------------------------------------------------------

struct CompareConfig {
  FitConfig fit{};
  MleOptions mle{};
};

struct ModelScore {
  std::string name;
  double neg_log_likelihood{0.0};
};

struct ComparisonReport {
  ModelScore stationary_parametric{"stationary-parametric"};
  ModelScore stationary_nonparametric{"stationary-nonparametric"};
  ModelScore nonstationary_nonparametric{"nonstationary-nonparametric"};
  MleResult mle{};
  SegmentFit stationary_fit{};
  std::vector<SegmentFit> piecewise_fits;
  std::vector<double> cuts;
  std::size_t test_event_count{0};
};

/// Fits the three model classes on `train` and scores -logL on `test`.
inline ComparisonReport compare_models(const ObservationSet& train, const ObservationSet& test,
                                       const std::vector<double>& cuts, const CompareConfig& cfg) {
  if (!(train.window() == test.window())) throw ValidationError("train and test windows differ");
  ComparisonReport rep;
  rep.cuts = cuts;
  rep.test_event_count = test.total_count();

  rep.mle = fit_exponential_mle(train, cfg.mle);
  rep.stationary_parametric.neg_log_likelihood =
      -log_likelihood(test, to_model(rep.mle.params, train.window()));

  auto whole = fit_segments(train, {}, cfg.fit);
  rep.stationary_fit = whole.front();
  rep.stationary_nonparametric.neg_log_likelihood = -log_likelihood(test, to_model(whole));

  rep.piecewise_fits = fit_segments(train, cuts, cfg.fit);
  rep.nonstationary_nonparametric.neg_log_likelihood =
      -log_likelihood(test, to_model(rep.piecewise_fits));
  return rep;
}

}  // namespace hawkes_mrs
