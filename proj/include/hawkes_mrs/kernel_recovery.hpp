#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/cumulants.hpp"
#include "hawkes_mrs/gp_smooth.hpp"

namespace hawkes_mrs {

/// Largest acceptable condition estimate of the Nystrom system.
inline constexpr double kMaxCondition = 1e12;

struct WienerHopfSolution {
  TabulatedKernel kernel;
  double residual_inf{0.0};  // max |(I + step*G) phi - g_vec|
  double rhs_inf{0.0};       // max |g_vec|
  double condition_estimate{1.0};
};

/// Nystrom solution of g(tau) = phi(tau) + int_0^A phi(s) g(tau - s) ds on
/// midpoint nodes tau_q = (q - 1/2) * A / Q. `g` is called with lags in
/// (-A, A) and must be even.
inline WienerHopfSolution solve_wiener_hopf(const std::function<double(double)>& g,
                                            std::size_t nodes, double support) {
  if (nodes < 2) throw ValidationError("Nystrom grid needs Q >= 2");
  if (!(support > 0.0) || !std::isfinite(support)) throw ValidationError("support A must be positive");
  const auto q = static_cast<Eigen::Index>(nodes);
  const double step = support / static_cast<double>(nodes);

  // G is Toeplitz: G[m, q] depends only on m - q.
  std::vector<double> lagged(nodes);
  for (std::size_t d = 0; d < nodes; ++d) lagged[d] = g(step * static_cast<double>(d));

  Eigen::MatrixXd a(q, q);
  Eigen::VectorXd rhs(q);
  for (Eigen::Index m = 0; m < q; ++m) {
    rhs[m] = g((static_cast<double>(m) + 0.5) * step);
    for (Eigen::Index c = 0; c < q; ++c) {
      a(m, c) = step * lagged[static_cast<std::size_t>(std::abs(m - c))];
    }
    a(m, m) += 1.0;
  }
  if (!a.allFinite() || !rhs.allFinite()) throw NumericalError("non-finite Wiener-Hopf system");

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1.0 / kMaxCondition)) {
    throw NumericalError("Wiener-Hopf system is singular or badly conditioned (rcond " +
                         std::to_string(rcond) + ")");
  }
  Eigen::VectorXd phi = lu.solve(rhs);
  if (!phi.allFinite()) throw NumericalError("Wiener-Hopf solve produced non-finite values");

  WienerHopfSolution out;
  out.residual_inf = (a * phi - rhs).cwiseAbs().maxCoeff();
  out.rhs_inf = rhs.cwiseAbs().maxCoeff();
  out.condition_estimate = 1.0 / rcond;
  out.kernel = TabulatedKernel(std::vector<double>(phi.data(), phi.data() + phi.size()), step);
  return out;
}

/// mu = Lambda * (1 - integral of phi).
inline double recover_mu(double lambda_hat, const TabulatedKernel& kernel) {
  const double br = kernel.integral();
  if (!(br < 1.0)) {
    throw NumericalError("unstable fit: kernel integral " + std::to_string(br) + " >= 1");
  }
  return lambda_hat * (1.0 - br);
}

/// Kernel recovery wants a finer lag grid than segmentation does: the
/// Nystrom solve interpolates g, and coarse bins flatten the peak at 0.
struct FitConfig {
  double h{0.1};
  std::size_t k_bins{60};
  std::size_t nodes{64};            // Q
  std::optional<double> support;    // A, defaults to K*h
  std::optional<GpConfig> gp;
  GOptions g_options{};

  [[nodiscard]] double resolved_support() const {
    return support.value_or(h * static_cast<double>(k_bins));
  }
};

struct SegmentFit {
  Interval segment{};
  double lambda_hat{0.0};
  double mu_hat{std::numeric_limits<double>::quiet_NaN()};
  TabulatedKernel kernel;
  double branching_ratio{0.0};
  bool stable{false};
  LagHistogram g_hat;
  double residual_inf{0.0};
  double rhs_inf{0.0};
  std::size_t event_count{0};
};

/// g-curve used by the solver: GP posterior mean or linear interpolation of
/// the histogram, zero beyond K*h, even in tau.
inline std::function<double(double)> g_curve(const LagHistogram& hist,
                                             const std::optional<GpConfig>& gp) {
  if (gp) {
    auto post = std::make_shared<GpPosterior>(hist, *gp);
    const double a = hist.support();
    return [post, a](double tau) {
      tau = std::abs(tau);
      return tau > a ? 0.0 : (*post)(tau);
    };
  }
  return [hist](double tau) { return hist.interpolate(tau); };
}

/// Recovers baseline and kernel on one interval of the data.
inline SegmentFit fit_segment(const ObservationSet& set, const Interval& segment,
                              const FitConfig& cfg) {
  SectorEstimate est = estimate_g(set, segment, cfg.h, cfg.k_bins, cfg.g_options);
  auto sol = solve_wiener_hopf(g_curve(est.histogram, cfg.gp), cfg.nodes, cfg.resolved_support());
  SegmentFit fit;
  fit.segment = segment;
  fit.lambda_hat = est.lambda_hat;
  fit.g_hat = est.histogram;
  fit.event_count = est.event_count;
  fit.kernel = sol.kernel;
  fit.residual_inf = sol.residual_inf;
  fit.rhs_inf = sol.rhs_inf;
  fit.branching_ratio = sol.kernel.integral();
  fit.stable = fit.branching_ratio < 1.0;
  if (fit.stable) fit.mu_hat = recover_mu(fit.lambda_hat, fit.kernel);
  return fit;
}

/// Splits the window at `cuts` and fits every resulting segment.
inline std::vector<SegmentFit> fit_segments(const ObservationSet& set, const std::vector<double>& cuts,
                                            const FitConfig& cfg) {
  const Interval w = set.window();
  std::vector<double> edges{w.start};
  for (double c : cuts) {
    if (!(c > edges.back()) || !(c < w.end)) {
      throw ValidationError("cuts must be time-ordered and strictly inside the window");
    }
    edges.push_back(c);
  }
  edges.push_back(w.end);
  std::vector<SegmentFit> out;
  out.reserve(edges.size() - 1);
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    try {
      out.push_back(fit_segment(set, {edges[s], edges[s + 1]}, cfg));
    } catch (const ValidationError& err) {
      throw ValidationError("segment " + std::to_string(s) + ": " + err.what());
    }
  }
  return out;
}

/// Piecewise model from segment fits. Negative kernel values are clamped to
/// zero and the baseline is recomputed from the clamped kernel so that each
/// piece keeps the estimated mean rate.
inline PiecewiseHawkesModel to_model(const std::vector<SegmentFit>& fits) {
  std::vector<double> breaks;
  std::vector<HawkesPiece> pieces;
  for (const auto& f : fits) {
    if (!f.stable || !(f.mu_hat > 0.0)) {
      throw NumericalError("segment [" + std::to_string(f.segment.start) + ", " +
                           std::to_string(f.segment.end) + ") has no valid fit");
    }
    TabulatedKernel clamped = f.kernel.clamped_nonnegative();
    const double mu = recover_mu(f.lambda_hat, clamped);
    breaks.push_back(f.segment.start);
    pieces.push_back({mu, TriggeringKernel(std::move(clamped))});
  }
  breaks.push_back(fits.back().segment.end);
  return PiecewiseHawkesModel(std::move(breaks), std::move(pieces));
}

}  // namespace hawkes_mrs
