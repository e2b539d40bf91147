#pragma once

#include "npglm/core_model.hpp"
#include "npglm/predictive.hpp"

#include <string_view>
#include <vector>

namespace npglm {

enum class Decision { Adequate, Inadequate };
std::string_view to_string(Decision d);

struct DiagnosticReport {
  double alpha_bar = 1.0;
  std::vector<double> alpha_i;
  double variance_hat = 0.0;  // sum (alpha_i - 1)^2 / (n - 1)
  double t_stat = 0.0;
  double p_value = 1.0;
  Decision decision = Decision::Adequate;
  double level = 0.01;
};

constexpr double kDefaultDiagnosticLevel = 0.01;
constexpr std::size_t kMinDiagnosticSize = 30;

// alpha_i = log(p_i) / log(F_i): F_i is the fitted model's success
// probability and p_i the candidate family's inverse link at the same index.
std::vector<double> alpha_star_profile(const ProbabilityModel& fit, const Matrix& X,
                                       LinkFamily family);

DiagnosticReport alpha_star_test(std::vector<double> alpha_i,
                                 double level = kDefaultDiagnosticLevel);

}  // namespace npglm
