#include "npglm/ars.hpp"

#include "npglm/core_model.hpp"
#include "npglm/stats.hpp"

#include <cmath>
#include <limits>

namespace npglm {

void ConfusionMatrix::validate() const {
  for (double c : {n11, n10, n01, n00}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("confusion counts must be finite and >= 0");
  }
}

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw ValidationError("confusion: prediction length " + std::to_string(pred.size()) +
                          " differs from truth length " + std::to_string(truth.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i];
    const int t = truth[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1)) {
      throw ValidationError("confusion: labels must be 0 or 1 (row " + std::to_string(i) + ")");
    }
    if (p == 1) {
      (t == 1 ? cm.n11 : cm.n10) += 1.0;
    } else {
      (t == 1 ? cm.n01 : cm.n00) += 1.0;
    }
  }
  return cm;
}

ConfusionMatrix smoothed(const ConfusionMatrix& cm, double epsilon) {
  cm.validate();
  if (!(epsilon >= 0.0)) throw ValidationError("ARS epsilon must be >= 0");
  ConfusionMatrix out = cm;
  if (cm.n11 == 0.0 || cm.n10 == 0.0 || cm.n01 == 0.0 || cm.n00 == 0.0) {
    out.n11 += epsilon;
    out.n10 += epsilon;
    out.n01 += epsilon;
    out.n00 += epsilon;
  }
  return out;
}

ClassificationRates rates(const ConfusionMatrix& cm, double epsilon) {
  const ConfusionMatrix s = smoothed(cm, epsilon);
  const double pos = s.n11 + s.n01;
  const double neg = s.n00 + s.n10;
  if (!(pos > 0.0)) throw ValidationError("ARS undefined: no true successes");
  if (!(neg > 0.0)) throw ValidationError("ARS undefined: no true failures");
  return {s.n11 / pos, s.n00 / neg, s.n10 / neg, s.n01 / pos};
}

double ars(const ConfusionMatrix& cm, double epsilon) {
  const ClassificationRates r = rates(cm, epsilon);
  const double correct = r.tp + r.tn;
  if (!(correct > 0.0)) throw ValidationError("ARS undefined: no correct classifications");
  return (r.fp + r.fn) / correct;
}

double ars_sigma(const ConfusionMatrix& cm, double epsilon) {
  const ConfusionMatrix s = smoothed(cm, epsilon);
  if (s.n11 == 0.0 || s.n10 == 0.0 || s.n01 == 0.0 || s.n00 == 0.0) {
    throw ValidationError("ARS sigma undefined: a confusion cell is zero");
  }
  return std::sqrt(1.0 / s.n11 + 1.0 / s.n10 + 1.0 / s.n01 + 1.0 / s.n00);
}

ARSResult ars_one_sample_test(const ConfusionMatrix& cm, double epsilon) {
  ARSResult out;
  out.cells = smoothed(cm, epsilon);
  out.epsilon_used = out.cells.n11 != cm.n11 ? epsilon : 0.0;
  out.rates = rates(cm, epsilon);
  out.ars = ars(cm, epsilon);
  out.sigma = ars_sigma(cm, epsilon);
  if (!(out.ars > 0.0)) throw ValidationError("ARS is zero; log-ARS test needs epsilon > 0");
  out.log_ars = std::log(out.ars);
  out.z = std::sqrt(cm.total()) * out.log_ars / out.sigma;
  out.p_value = two_sided_normal_p(out.z);
  return out;
}

TwoSampleResult ars_two_sample_test(std::span<const double> first, std::span<const double> second,
                                    bool paired) {
  if (first.size() < 2 || second.size() < 2) {
    throw ValidationError("two-sample ARS test needs at least 2 values per sample");
  }
  TwoSampleResult out;
  out.paired = paired;
  double diff = 0.0;
  double se = 0.0;
  if (paired) {
    if (first.size() != second.size()) {
      throw ValidationError("paired ARS test needs equal sample sizes");
    }
    std::vector<double> d(first.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = first[i] - second[i];
    diff = mean(d);
    se = std::sqrt(sample_variance(d) / static_cast<double>(d.size()));
    out.dof = static_cast<double>(d.size()) - 1.0;
  } else {
    const double n1 = static_cast<double>(first.size());
    const double n2 = static_cast<double>(second.size());
    const double pooled =
        ((n1 - 1.0) * sample_variance(first) + (n2 - 1.0) * sample_variance(second)) / (n1 + n2 - 2.0);
    diff = mean(first) - mean(second);
    se = std::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
    out.dof = n1 + n2 - 2.0;
  }
  if (se == 0.0) {
    if (diff == 0.0) return out;
    out.t = diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  out.t = diff / se;
  out.p_value = two_sided_t_p(out.t, out.dof);
  return out;
}

}  // namespace npglm
