#pragma once

// Latent adaptive hierarchical EM-like sampler: binary regression with a
// nonparametric latent residual distribution, a link-constraint exponent
// alpha*, Metropolis coefficient updates and optional adaptive-lasso
// shrinkage.

#include "npglm/baselines.hpp"
#include "npglm/core_model.hpp"
#include "npglm/latent_cdf.hpp"
#include "npglm/predictive.hpp"
#include "npglm/stats.hpp"

#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace npglm {

struct SignedMeasureSplit {
  std::vector<Eigen::Index> s_plus;
  std::vector<Eigen::Index> s_minus;
  double nu_plus = 0.0;
  double nu_minus = 0.0;
  // kappa-quantile of |y*| on each side; 0 for an empty side.
  double cap_plus = 0.0;
  double cap_minus = 0.0;
};

// Hahn partition of the latent values by sign, with each side's magnitudes
// capped at that side's kappa-quantile of |y*| and the two masses normalized
// to sum to one.
SignedMeasureSplit jordan_split(std::span<const double> ystar, double kappa);

struct ShrinkState {
  Vector lambda;  // one rate per penalized coefficient (all but the intercept)
  double sigma2 = 1.0;
  double r = 0.1;
  double delta = 0.1;

  static ShrinkState initial(Eigen::Index n_penalized, double r = 0.1, double delta = 0.1);
  void validate() const;
};

// lambda_k | beta_k ~ Gamma(r + 1, rate = delta + |beta_k| / sqrt(sigma2)),
// beta_k running over the penalized coefficients beta(1..).
ShrinkState update_shrinkage(const Vector& beta, const ShrinkState& shrink, Rng& rng);

// Log Laplace density of the penalized coefficients, sum of
// log(lambda_k / 2 sigma) - lambda_k |beta_k| / sigma.
double laplace_log_prior(const Vector& beta, const ShrinkState& shrink);

struct AlphaUpdate {
  std::vector<double> alpha_i;
  double alpha_star = 1.0;
};

// Chooses alpha* from the per-observation solutions.
using AlphaStarKernel =
    std::function<double(std::span<const double> alpha_i, const Vector& y, std::span<const double> ystar,
                         const SignedMeasureSplit& split, Rng& rng)>;

// Default kernel: resample one alpha_i from the success side (y = 1) when
// nu_plus >= nu_minus and from the failure side otherwise, among that side's
// observations with |y*| within the side's cap.
double resample_alpha_star(std::span<const double> alpha_i, const Vector& y, std::span<const double> ystar,
                           const SignedMeasureSplit& split, Rng& rng);

// alpha_i = log(p_link_i) / log(fhat_i), the exact root of fhat_i^alpha = p_i.
std::vector<double> solve_link_constraint(std::span<const double> fhat_vals,
                                          std::span<const double> p_link);

AlphaUpdate update_alpha_star(std::span<const double> fhat_vals, std::span<const double> p_link,
                              const Vector& y, std::span<const double> ystar,
                              const SignedMeasureSplit& split, Rng& rng,
                              const AlphaStarKernel& kernel = resample_alpha_star);

struct LatentState {
  std::vector<double> ystar;
  Vector beta;
  double alpha_star = 1.0;
  double kappa = 0.5;
  // Standard deviation of the latent residual distribution. Not identified
  // by the likelihood; it moves within the configured band.
  double latent_scale = 1.0;
  SmoothedECDF fhat;
};

// q_i = clamp(P_i^alpha*) with P_i = 1 - fhat(-x_i'beta), the success
// probability implied by the latent model.
Vector latent_success_probability(const Matrix& X, const Vector& beta, const SmoothedECDF& fhat,
                                  double alpha_star);

double latent_log_likelihood(const BinaryDataset& data, const Vector& beta,
                             const SmoothedECDF& fhat, double alpha_star);

// Bernoulli log-likelihood plus, when shrink is set, the Laplace log prior.
double laheml_log_target(const BinaryDataset& data, const Vector& beta, const SmoothedECDF& fhat,
                         double alpha_star, const ShrinkState* shrink);

// Metropolis acceptance probability min(1, exp(log_ratio)).
double metropolis_acceptance(double log_ratio);
// Accept with probability metropolis_acceptance(log_ratio).
bool metropolis_accept(double log_ratio, Rng& rng);

struct RandomWalkProposal {
  Matrix chol;  // lower Cholesky factor of the unit-latent-scale covariance
  double scale = 1.0;
};

struct MhOutcome {
  Vector beta;
  bool accepted = false;
  double acceptance_probability = 0.0;
};

// Metropolis step for beta given an explicit proposal.
MhOutcome mh_step_beta(const LatentState& state, const BinaryDataset& data, const Vector& proposal,
                       const ShrinkState* shrink, Rng& rng);

// Gaussian random-walk step: beta' = beta + scale * latent_scale * chol * z.
MhOutcome mh_step_beta(const LatentState& state, const BinaryDataset& data,
                       const RandomWalkProposal& proposal, const ShrinkState* shrink, Rng& rng);

struct KappaFixed {
  double value = 0.5;
};
struct KappaObservedProportion {};
using KappaMode = std::variant<KappaFixed, KappaObservedProportion>;

struct LahemlOptions {
  McmcOptions mcmc;
  bool penalized = false;
  KappaMode kappa_mode = KappaObservedProportion{};
  // Parametric link the latent distribution is held against in the link
  // constraint.
  LinkFamily reference_family = LinkFamily::Logit;
  // Band for the latent residual standard deviation: unit variance up to the
  // logistic variance.
  double min_latent_scale = 1.0;
  double max_latent_scale = std::numbers::pi / std::numbers::sqrt3;
  double scale_step = 0.25;
  // Kernel bandwidth of the per-iteration residual refresh, as a multiple of
  // the Silverman bandwidth.
  double refresh_bandwidth_factor = 0.5;
  double target_acceptance = 0.23;
  // Retained residual distributions pooled into the fitted model's CDF.
  int model_snapshots = 20;
  double level = kDefaultLevel;
  double shrink_r = 0.1;
  double shrink_delta = 0.1;
  AlphaStarKernel alpha_kernel = resample_alpha_star;

  void validate() const;
};

struct LahemlFit {
  FitResult result;
  // Columns: coefficients, alpha_star, then lambda_<name> when penalized.
  Chain chain;
  std::vector<double> latent_scale_trace;
  double kappa = 0.5;
  double acceptance_rate = 0.0;
  double final_proposal_scale = 0.0;
  long fallback_draws = 0;
  bool sign_consistent = true;
  bool split_valid = true;
  // Mean over retained draws of fhat(0) on the unit latent scale.
  double fhat_at_zero = 0.5;
  LatentModel model;
};

double kappa_value(const KappaMode& mode, const Vector& y);

LahemlFit run_laheml(const BinaryDataset& data, const LahemlOptions& opts);

}  // namespace npglm
