#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace npglm {

// Counts indexed (predicted, true).
struct ConfusionMatrix {
  double n11 = 0.0;
  double n10 = 0.0;
  double n01 = 0.0;
  double n00 = 0.0;

  double total() const { return n11 + n10 + n01 + n00; }
  void validate() const;
};

constexpr double kDefaultArsEpsilon = 0.5;

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth);

// Adds epsilon to every cell when any cell is zero.
ConfusionMatrix smoothed(const ConfusionMatrix& cm, double epsilon);

struct ClassificationRates {
  double tp = 0.0;
  double tn = 0.0;
  double fp = 0.0;
  double fn = 0.0;
};

ClassificationRates rates(const ConfusionMatrix& cm, double epsilon = kDefaultArsEpsilon);

// (FP + FN) / (TP + TN).
double ars(const ConfusionMatrix& cm, double epsilon = kDefaultArsEpsilon);

// sqrt of the summed reciprocal cell counts.
double ars_sigma(const ConfusionMatrix& cm, double epsilon = kDefaultArsEpsilon);

struct ARSResult {
  ConfusionMatrix cells;  // after smoothing
  ClassificationRates rates;
  double ars = 0.0;
  double log_ars = 0.0;
  double sigma = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double epsilon_used = 0.0;
};

// z = sqrt(n) log(ARS) / sigma against the standard normal, two-sided.
ARSResult ars_one_sample_test(const ConfusionMatrix& cm, double epsilon = kDefaultArsEpsilon);

struct TwoSampleResult {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  bool paired = false;
};

// Pooled-variance t on two samples of log-ARS, or a one-sample t on the
// differences when paired.
TwoSampleResult ars_two_sample_test(std::span<const double> first, std::span<const double> second,
                                    bool paired);

}  // namespace npglm
