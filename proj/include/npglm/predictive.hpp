#pragma once

#include "npglm/core_model.hpp"
#include "npglm/latent_cdf.hpp"

#include <variant>
#include <vector>

namespace npglm {

// A fitted parametric link: P(y=1|x) = F(x'beta).
struct ParametricModel {
  LinkFamily family = LinkFamily::Logit;
  Vector beta;
  double cutoff = 0.5;
};

// A fitted nonparametric latent model on the unit latent scale:
// P(y=1|x) = clamp((1 - G(-x'gamma))^alpha) with G the residual CDF.
struct LatentModel {
  Vector gamma;
  std::vector<double> unit_support;
  double unit_bandwidth = 1.0;
  double alpha_star = 1.0;
  double cutoff = 0.5;
};

using ProbabilityModel = std::variant<ParametricModel, LatentModel>;

Vector success_probability(const ProbabilityModel& model, const Matrix& X);

// Linear index expressed in mean-0, unit-variance latent units, so links of
// different families can be compared on one scale.
Vector unit_index(const ProbabilityModel& model, const Matrix& X);

double classification_cutoff(const ProbabilityModel& model);

// 1 where the success probability reaches the model's cutoff.
std::vector<int> classify(const ProbabilityModel& model, const Matrix& X);

}  // namespace npglm
