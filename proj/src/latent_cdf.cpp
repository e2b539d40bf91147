#include "npglm/latent_cdf.hpp"

#include "npglm/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace npglm {

namespace {
// Kernel mass beyond this many bandwidths is below 1e-15.
constexpr double kKernelReach = 8.0;
}  // namespace

SmoothedECDF::SmoothedECDF(std::vector<double> support, double bandwidth)
    : support_(std::move(support)), bandwidth_(bandwidth) {
  if (support_.empty()) throw ValidationError("smoothed ECDF needs at least one support point");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
    throw ValidationError("smoothed ECDF bandwidth must be positive and finite");
  }
  for (double s : support_) {
    if (!std::isfinite(s)) throw ValidationError("smoothed ECDF support must be finite");
  }
  std::sort(support_.begin(), support_.end());
  build_table();
}

void SmoothedECDF::build_table() {
  const int m = kTableSize;
  const double reach = kKernelReach * bandwidth_;
  lo_ = support_.front() - reach;
  const double hi = support_.back() + reach;
  step_ = (hi - lo_) / (m - 1);

  // Linear binning of the support onto the grid.
  std::vector<double> weight(static_cast<std::size_t>(m), 0.0);
  const double w = 1.0 / static_cast<double>(support_.size());
  for (double s : support_) {
    const double pos = (s - lo_) / step_;
    const auto k = std::clamp(static_cast<int>(std::floor(pos)), 0, m - 2);
    const double frac = pos - k;
    weight[static_cast<std::size_t>(k)] += w * (1.0 - frac);
    weight[static_cast<std::size_t>(k) + 1] += w * frac;
  }
  std::vector<double> prefix(static_cast<std::size_t>(m) + 1, 0.0);
  for (int k = 0; k < m; ++k) prefix[static_cast<std::size_t>(k) + 1] = prefix[static_cast<std::size_t>(k)] + weight[static_cast<std::size_t>(k)];

  const int reach_cells = std::min(m, static_cast<int>(std::ceil(reach / step_)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * reach_cells + 1));
  for (int d = -reach_cells; d <= reach_cells; ++d) {
    kernel[static_cast<std::size_t>(d + reach_cells)] = normal_cdf(d * step_ / bandwidth_);
  }

  table_.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    const int first = std::max(0, i - reach_cells);
    const int last = std::min(m - 1, i + reach_cells);
    double f = prefix[static_cast<std::size_t>(first)];
    for (int k = first; k <= last; ++k) {
      f += weight[static_cast<std::size_t>(k)] * kernel[static_cast<std::size_t>(i - k + reach_cells)];
    }
    table_[static_cast<std::size_t>(i)] = std::min(1.0, f);
  }
  for (int i = 1; i < m; ++i) {
    table_[static_cast<std::size_t>(i)] = std::max(table_[static_cast<std::size_t>(i)], table_[static_cast<std::size_t>(i) - 1]);
  }
}

double SmoothedECDF::raw_cdf(double x) const {
  if (std::isnan(x)) throw ValidationError("smoothed ECDF evaluated at NaN");
  const double pos = (x - lo_) / step_;
  if (pos <= 0.0) return 0.0;
  if (pos >= kTableSize - 1) return 1.0;
  const auto k = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(k);
  return table_[k] + frac * (table_[k + 1] - table_[k]);
}

double SmoothedECDF::cdf(double x) const { return std::clamp(raw_cdf(x), kClampLow, kClampHigh); }

double SmoothedECDF::exact_cdf(double x) const {
  double f = 0.0;
  for (double s : support_) f += normal_cdf((x - s) / bandwidth_);
  return std::clamp(f / static_cast<double>(support_.size()), kClampLow, kClampHigh);
}

double SmoothedECDF::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw ValidationError("quantile level must be in (0,1)");
  const auto it = std::upper_bound(table_.begin(), table_.end(), u);
  if (it == table_.begin()) return lo_;
  if (it == table_.end()) return lo_ + step_ * (kTableSize - 1);
  const auto k = static_cast<std::size_t>(it - table_.begin()) - 1;
  const double span = table_[k + 1] - table_[k];
  const double frac = span > 0.0 ? (u - table_[k]) / span : 0.0;
  return lo_ + step_ * (static_cast<double>(k) + frac);
}

double SmoothedECDF::support_mean() const { return mean(support_); }

double SmoothedECDF::smoothed_sd() const {
  const double m = support_mean();
  double ss = 0.0;
  for (double s : support_) ss += (s - m) * (s - m);
  return std::sqrt(ss / static_cast<double>(support_.size()) + bandwidth_ * bandwidth_);
}

SmoothedECDF SmoothedECDF::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("scale factor must be positive");
  std::vector<double> s(support_);
  for (double& v : s) v *= factor;
  return {std::move(s), bandwidth_ * factor};
}

double silverman_bandwidth(std::span<const double> residuals) {
  const double sd = std::sqrt(sample_variance(residuals));
  return 1.06 * sd * std::pow(static_cast<double>(residuals.size()), -0.2);
}

SmoothedECDF estimate_latent_cdf(std::span<const double> residuals) {
  if (residuals.size() < 10) {
    throw ValidationError("latent CDF estimate needs at least 10 residuals, got " +
                          std::to_string(residuals.size()));
  }
  for (double r : residuals) {
    if (!std::isfinite(r)) throw ValidationError("latent residuals must be finite");
  }
  const double h = silverman_bandwidth(residuals);
  if (!(h > 0.0)) throw ValidationError("latent residuals are all identical (degenerate latent scale)");
  return {std::vector<double>(residuals.begin(), residuals.end()), h};
}

LatentDraw draw_latent(int y, double mu, const SmoothedECDF& fhat, Rng& rng) {
  constexpr double kMinMass = 1e-9;
  // y = 1 needs eps >= -mu; y = 0 needs eps < -mu.
  const double boundary = -mu;
  const double c = fhat.raw_cdf(boundary);
  LatentDraw out;
  if (y == 1) {
    const double mass = 1.0 - c;
    double eps = boundary;
    if (mass < kMinMass) {
      out.fallback = true;
    } else {
      const double u = std::clamp(c + mass * uniform_open(rng), std::nextafter(0.0, 1.0),
                                  std::nextafter(1.0, 0.0));
      eps = std::max(fhat.quantile(u), boundary);
    }
    out.value = std::max(0.0, mu + eps);
  } else {
    const double mass = c;
    double eps = boundary;
    if (mass < kMinMass) {
      out.fallback = true;
    } else {
      const double u = std::clamp(mass * uniform_open(rng), std::nextafter(0.0, 1.0),
                                  std::nextafter(1.0, 0.0));
      eps = std::min(fhat.quantile(u), boundary);
    }
    const double v = mu + eps;
    out.value = v < 0.0 ? v : -std::numeric_limits<double>::min();
  }
  return out;
}

}  // namespace npglm
