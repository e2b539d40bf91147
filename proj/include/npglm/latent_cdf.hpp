#pragma once

#include "npglm/stats.hpp"

#include <span>
#include <vector>

namespace npglm {

// Gaussian-kernel smoothed empirical CDF of latent residuals.
//
// `cdf` and `quantile` run off a dense table built once at construction
// (linear binning of the support, then a truncated kernel convolution), so a
// sampler can evaluate them thousands of times per iteration. `exact_cdf` sums
// the kernel over every support point and is meant for checks.
class SmoothedECDF {
 public:
  static constexpr double kClampLow = 1e-6;
  static constexpr double kClampHigh = 1.0 - 1e-6;
  static constexpr int kTableSize = 1024;

  SmoothedECDF(std::vector<double> support, double bandwidth);

  // Clamped to [kClampLow, kClampHigh].
  double cdf(double x) const;
  // Same table, unclamped; 0 and 1 beyond the tabulated range.
  double raw_cdf(double x) const;
  double exact_cdf(double x) const;
  // Inverse of raw_cdf for u in (0, 1).
  double quantile(double u) const;

  const std::vector<double>& support() const { return support_; }
  double bandwidth() const { return bandwidth_; }
  double support_mean() const;
  // Standard deviation of the smoothed distribution (support sd with n
  // denominator, plus the kernel variance).
  double smoothed_sd() const;

  // Distribution of c * X for c > 0: support and bandwidth both scaled.
  SmoothedECDF scaled(double factor) const;

 private:
  void build_table();

  std::vector<double> support_;
  double bandwidth_;
  double lo_ = 0.0;
  double step_ = 1.0;
  std::vector<double> table_;
};

double silverman_bandwidth(std::span<const double> residuals);

// KDE with the Silverman bandwidth 1.06 * sd * n^(-1/5). Needs n >= 10 and a
// non-degenerate spread.
SmoothedECDF estimate_latent_cdf(std::span<const double> residuals);

struct LatentDraw {
  double value = 0.0;
  // The feasible probability mass was below 1e-9 and the boundary was used.
  bool fallback = false;
};

// y* = mu + eps with eps ~ fhat restricted so that y* >= 0 iff y == 1.
LatentDraw draw_latent(int y, double mu, const SmoothedECDF& fhat, Rng& rng);

}  // namespace npglm
