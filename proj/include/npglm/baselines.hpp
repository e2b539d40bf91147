#pragma once

#include "npglm/core_model.hpp"
#include "npglm/stats.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace npglm {

struct McmcOptions {
  int n_iters = 5000;
  int n_burnin = 2500;
  std::uint64_t seed = 1;
  double proposal_scale = 1.0;
  int thin = 1;

  void validate() const;
};

// Retained MCMC output: one row per kept draw.
struct Chain {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::vector<double> column(std::size_t j) const;
};

// Posterior mean and equal-tailed interval for the first `n_coef` columns.
FitResult summarize_chain(const Chain& chain, std::size_t n_coef, double level,
                          std::string method_tag);

// Two-sided critical value for a `level` (e.g. 0.99) central interval.
double central_z(double level);

inline constexpr double kDefaultLevel = 0.99;

struct MleOptions {
  int max_iter = 100;
  double grad_tol = 1e-8;
  double level = kDefaultLevel;
};

struct MleFit {
  FitResult result;
  Matrix covariance;
  int iterations = 0;
  // Log-likelihood after each accepted Newton step, starting at beta = 0.
  std::vector<double> loglik_trace;
};

double logit_loglik(const BinaryDataset& data, const Vector& beta);

// Newton-Raphson with step halving; Wald intervals from the inverse observed
// information.
MleFit fit_mle_logit(const BinaryDataset& data, const MleOptions& opts = {});

struct PenalizedOptions {
  // Penalty weight on the mean negative log-likelihood scale. Unset means
  // pick by cross-validation.
  std::optional<double> lambda;
  int cv_folds = 5;
  int cv_grid = 20;
  int bootstrap = 200;
  double level = kDefaultLevel;
  std::uint64_t seed = 1;
  int max_iter = 200;
  double tol = 1e-10;
};

// L1-penalized logistic regression (intercept unpenalized), solved by
// proximal Newton with coordinate descent. Optionally warm-started.
Vector penalized_logit_path_point(const BinaryDataset& data, double lambda,
                                  const std::optional<Vector>& start = std::nullopt,
                                  int max_iter = 200, double tol = 1e-10);

// Smallest lambda at which every slope is zero.
double penalized_logit_lambda_max(const BinaryDataset& data);

// Lambda minimizing K-fold cross-validated deviance over a log grid.
double select_lambda_cv(const BinaryDataset& data, const PenalizedOptions& opts);

struct PenalizedFit {
  FitResult result;
  double lambda = 0.0;
};

// Point estimate at lambda; percentile bootstrap intervals.
PenalizedFit fit_penalized_logit(const BinaryDataset& data, const PenalizedOptions& opts = {});

enum class TruncationSide { NonNegative, Negative };

// Exact draw from N(mu, sigma^2) restricted to [0, inf) or (-inf, 0).
double sample_truncated_normal(double mu, double sigma, TruncationSide side, Rng& rng);

struct AlbertChibFit {
  FitResult result;
  Chain chain;
  // Sample variance of y* - x'beta pooled over retained draws.
  double latent_residual_variance = 0.0;
  // Every retained latent vector agreed in sign with y.
  bool sign_consistent = true;
};

struct AlbertChibOptions {
  McmcOptions mcmc;
  double prior_variance = 100.0;
  double level = kDefaultLevel;
};

// Gibbs sampler for the probit model with unit latent variance.
AlbertChibFit fit_albert_chib_probit(const BinaryDataset& data, const AlbertChibOptions& opts);

}  // namespace npglm
