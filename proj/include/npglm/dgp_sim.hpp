#pragma once

#include "npglm/core_model.hpp"
#include "npglm/methods.hpp"
#include "npglm/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace npglm {

struct SimCell {
  LinkFamily dgp = LinkFamily::Logit;
  ModelForm form = ModelForm::linear();
  int n = 500;
  double balance = 0.5;
  // Non-intercept coefficients, one per raw covariate.
  std::vector<double> slopes{1.0, 1.0};
  std::uint64_t seed = 1;
  bool nuisance = false;

  void validate() const;
};

struct SimData {
  BinaryDataset data;
  Vector true_beta;  // intercept first; nuisance coefficient (0) last when present
};

// Intercept b such that mean_i F(b + offset_i) = target, to within 1e-3.
double calibrate_intercept(const Vector& offset, LinkFamily family, double target);

SimData generate_dataset(const SimCell& cell);

// Fresh sample of n rows from the cell's design with fixed coefficients.
BinaryDataset sample_dataset(const SimCell& cell, const Vector& beta, int n, std::uint64_t seed);

// Fraction of components with ci_low_j <= truth_j <= ci_high_j.
double coverage_flag(const Vector& ci_low, const Vector& ci_high, const Vector& truth);

struct GridSpec {
  std::vector<LinkFamily> dgps{LinkFamily::Logit, LinkFamily::Probit, LinkFamily::CLogLog};
  std::vector<ModelForm> forms{ModelForm::linear(), ModelForm::mixed(), ModelForm::nonlinear()};
  std::vector<int> sizes{100, 500, 1000, 2000};
  std::vector<double> balances{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<Method> methods{all_methods()};
  std::vector<double> slopes{1.0, 1.0};
  bool nuisance = false;
  int replications = 20;
  std::uint64_t master_seed = 1;
  MethodSettings settings;
  int threads = 1;
  // When non-empty, replication 0 of every cell x method writes its chain here.
  std::string chain_dir;

  void validate() const;
  std::vector<SimCell> cells() const;
};

struct SimRow {
  LinkFamily dgp = LinkFamily::Logit;
  ModelFormTag form = ModelFormTag::Linear;
  int n = 0;
  double balance = 0.0;
  Method method = Method::MleLogit;
  double coverage = 0.0;
  double ci_width = 0.0;
  double ars_train = 0.0;
  double ars_test = 0.0;
  int replications = 0;
  // Per-replication values, kept for pooled comparisons.
  std::vector<double> coverage_reps;
  std::vector<double> ars_train_reps;
  std::vector<double> ars_test_reps;
  std::vector<std::string> failures;
};

struct SimReport {
  std::vector<SimRow> rows;  // sorted by (dgp, form, n, balance, method)
  bool all_succeeded() const;
};

SimReport run_grid(const GridSpec& spec);

}  // namespace npglm
