#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hawkes_mrs/core.hpp"
#include "hawkes_mrs/cumulants.hpp"

namespace hawkes_mrs {

/// Squared-exponential GP: ker(x, x') = theta0 * exp(-theta1 / 2 * (x - x')^2),
/// observation noise variance noise_var. An empty eval_grid means "the
/// histogram's own bin midpoints".
struct GpConfig {
  double theta0{1.0};
  double theta1{1.0};
  double noise_var{0.01};
  std::vector<double> eval_grid;

  void validate() const {
    if (!(theta0 > 0.0) || !(theta1 > 0.0) || !(noise_var >= 0.0)) {
      throw ValidationError("GP hyperparameters need theta0 > 0, theta1 > 0, noise_var >= 0");
    }
    for (std::size_t i = 1; i < eval_grid.size(); ++i) {
      if (!(eval_grid[i] > eval_grid[i - 1])) {
        throw ValidationError("GP eval grid must be strictly increasing");
      }
    }
  }
};

/// Diagonal jitter, relative to theta0, added before factorization.
inline constexpr double kGpJitter = 1e-10;

/// Posterior mean of a GP fitted to a histogram at its bin midpoints.
class GpPosterior {
 public:
  GpPosterior(const LagHistogram& histogram, const GpConfig& config)
      : theta0_(config.theta0), theta1_(config.theta1) {
    config.validate();
    const auto k = static_cast<Eigen::Index>(histogram.bin_count());
    inputs_.resize(k);
    Eigen::VectorXd y(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      inputs_[i] = histogram.midpoint(static_cast<std::size_t>(i));
      y[i] = histogram.values()[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd c(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) c(i, j) = kernel(inputs_[i], inputs_[j]);
      c(i, i) += config.noise_var + kGpJitter * theta0_;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("GP covariance is not positive definite after jitter");
    }
    weights_ = llt.solve(y);
    if (!weights_.allFinite()) throw NumericalError("GP solve produced non-finite weights");
  }

  [[nodiscard]] double operator()(double tau) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < inputs_.size(); ++i) s += kernel(inputs_[i], tau) * weights_[i];
    return s;
  }

 private:
  [[nodiscard]] double kernel(double x, double y) const {
    const double d = x - y;
    return theta0_ * std::exp(-0.5 * theta1_ * d * d);
  }

  double theta0_;
  double theta1_;
  Eigen::VectorXd inputs_;
  Eigen::VectorXd weights_;
};

inline std::vector<double> posterior_mean(const LagHistogram& histogram, const GpConfig& config) {
  GpPosterior gp(histogram, config);
  std::vector<double> out;
  if (config.eval_grid.empty()) {
    out.reserve(histogram.bin_count());
    for (std::size_t k = 0; k < histogram.bin_count(); ++k) out.push_back(gp(histogram.midpoint(k)));
  } else {
    out.reserve(config.eval_grid.size());
    for (double tau : config.eval_grid) out.push_back(gp(tau));
  }
  return out;
}

/// Replaces each sector's histogram by its GP posterior mean. A custom
/// eval grid must be a uniform midpoint grid ((k + 1/2) * step) so the result
/// is again a LagHistogram.
inline std::vector<SectorEstimate> smooth_estimates(const std::vector<SectorEstimate>& estimates,
                                                    const GpConfig& config) {
  config.validate();
  double new_width = 0.0;
  if (!config.eval_grid.empty()) {
    const double step = config.eval_grid.size() > 1 ? config.eval_grid[1] - config.eval_grid[0]
                                                    : 2.0 * config.eval_grid[0];
    for (std::size_t k = 0; k < config.eval_grid.size(); ++k) {
      if (std::abs(config.eval_grid[k] - (static_cast<double>(k) + 0.5) * step) > 1e-9 * step) {
        throw ValidationError("smoothing eval grid must be uniform bin midpoints");
      }
    }
    new_width = step;
  }
  std::vector<SectorEstimate> out;
  out.reserve(estimates.size());
  for (const auto& e : estimates) {
    if (!estimates.empty() && (e.histogram.bin_count() != estimates.front().histogram.bin_count() ||
                               e.histogram.bin_width() != estimates.front().histogram.bin_width())) {
      throw ValidationError("smoothing needs shared h and K across sectors");
    }
    SectorEstimate s = e;
    try {
      const double w = new_width > 0.0 ? new_width : e.histogram.bin_width();
      s.histogram = LagHistogram(posterior_mean(e.histogram, config), w);
    } catch (const NumericalError& err) {
      throw NumericalError("sector " + std::to_string(e.sector_index) + ": " + err.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Empirical sector count: round(N / (250 L)), at least 2.
inline std::size_t suggest_m(std::size_t total_count, std::size_t series_count) {
  if (total_count < 1 || series_count < 1) throw ValidationError("suggest_m needs N >= 1 and L >= 1");
  const double m = std::round(static_cast<double>(total_count) /
                              (250.0 * static_cast<double>(series_count)));
  return m < 2.0 ? 2 : static_cast<std::size_t>(m);
}

}  // namespace hawkes_mrs
