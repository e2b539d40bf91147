#include "npglm/predictive.hpp"

#include <algorithm>
#include <cmath>

namespace npglm {

namespace {

struct ProbabilityVisitor {
  const Matrix& X;

  Vector operator()(const ParametricModel& m) const {
    const Vector eta = linear_predictor(X, m.beta);
    Vector p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) p(i) = inverse_link(m.family, eta(i));
    return p;
  }

  Vector operator()(const LatentModel& m) const {
    const Vector eta = linear_predictor(X, m.gamma);
    const SmoothedECDF g(m.unit_support, m.unit_bandwidth);
    Vector p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double base = std::clamp(1.0 - g.raw_cdf(-eta(i)), SmoothedECDF::kClampLow,
                                     SmoothedECDF::kClampHigh);
      p(i) = clamp_probability(std::pow(base, m.alpha_star));
    }
    return p;
  }
};

}  // namespace

Vector success_probability(const ProbabilityModel& model, const Matrix& X) {
  return std::visit(ProbabilityVisitor{X}, model);
}

Vector unit_index(const ProbabilityModel& model, const Matrix& X) {
  if (const auto* m = std::get_if<ParametricModel>(&model)) {
    return (linear_predictor(X, m->beta).array() - link_latent_mean(m->family)) /
           link_latent_sd(m->family);
  }
  return linear_predictor(X, std::get<LatentModel>(model).gamma);
}

double classification_cutoff(const ProbabilityModel& model) {
  return std::visit([](const auto& m) { return m.cutoff; }, model);
}

std::vector<int> classify(const ProbabilityModel& model, const Matrix& X) {
  const Vector p = success_probability(model, X);
  const double cut = classification_cutoff(model);
  std::vector<int> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p(i) >= cut ? 1 : 0;
  return out;
}

}  // namespace npglm
