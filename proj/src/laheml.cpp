#include "npglm/laheml.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace npglm {

SignedMeasureSplit jordan_split(std::span<const double> ystar, double kappa) {
  if (ystar.empty()) throw ValidationError("jordan_split: empty latent vector");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw ValidationError("jordan_split: kappa must be in (0,1]");
  SignedMeasureSplit split;
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < ystar.size(); ++i) {
    const double v = ystar[i];
    if (!std::isfinite(v)) throw ValidationError("jordan_split: non-finite latent value");
    if (v >= 0.0) {
      split.s_plus.push_back(static_cast<Eigen::Index>(i));
      pos.push_back(v);
    } else {
      split.s_minus.push_back(static_cast<Eigen::Index>(i));
      neg.push_back(-v);
    }
  }
  auto truncated_mass = [kappa](std::vector<double>& mags, double& cap) {
    cap = 0.0;
    if (mags.empty()) return 0.0;
    std::sort(mags.begin(), mags.end());
    cap = quantile(mags, kappa);
    double total = 0.0;
    for (double m : mags) total += std::min(m, cap);
    return total;
  };
  const double plus = truncated_mass(pos, split.cap_plus);
  const double minus = truncated_mass(neg, split.cap_minus);
  const double total = plus + minus;
  if (total > 0.0) {
    split.nu_plus = plus / total;
    split.nu_minus = minus / total;
  } else {
    // Every latent value is exactly zero, hence in S+.
    split.nu_plus = 1.0;
    split.nu_minus = 0.0;
  }
  return split;
}

ShrinkState ShrinkState::initial(Eigen::Index n_penalized, double r, double delta) {
  ShrinkState s;
  s.r = r;
  s.delta = delta;
  s.lambda = Vector::Constant(n_penalized, (r + 1.0) / (delta + 1.0));
  return s;
}

void ShrinkState::validate() const {
  if (!(sigma2 > 0.0) || !(r > 0.0) || !(delta > 0.0)) {
    throw ValidationError("shrinkage hyperparameters must be positive");
  }
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (!(lambda(k) > 0.0)) throw ValidationError("shrinkage rates must be positive");
  }
}

ShrinkState update_shrinkage(const Vector& beta, const ShrinkState& shrink, Rng& rng) {
  shrink.validate();
  if (beta.size() != shrink.lambda.size() + 1) {
    throw ValidationError("update_shrinkage: beta must have one more entry than lambda");
  }
  ShrinkState next = shrink;
  const double root = std::sqrt(shrink.sigma2);
  for (Eigen::Index k = 0; k < shrink.lambda.size(); ++k) {
    const double rate = shrink.delta + std::abs(beta(k + 1)) / root;
    std::gamma_distribution<double> gamma(shrink.r + 1.0, 1.0 / rate);
    double draw = gamma(rng);
    // A Gamma(1.1, .) draw can underflow to exactly zero.
    if (!(draw > 0.0)) draw = std::numeric_limits<double>::min();
    next.lambda(k) = draw;
  }
  return next;
}

double laplace_log_prior(const Vector& beta, const ShrinkState& shrink) {
  const double root = std::sqrt(shrink.sigma2);
  double lp = 0.0;
  for (Eigen::Index k = 0; k < shrink.lambda.size(); ++k) {
    lp += std::log(shrink.lambda(k) / (2.0 * root)) - shrink.lambda(k) * std::abs(beta(k + 1)) / root;
  }
  return lp;
}

double resample_alpha_star(std::span<const double> alpha_i, const Vector& y, std::span<const double> ystar,
                           const SignedMeasureSplit& split, Rng& rng) {
  if (ystar.size() != alpha_i.size()) throw ValidationError("resample_alpha_star: length mismatch");
  const bool plus = split.nu_plus >= split.nu_minus;
  const double side = plus ? 1.0 : 0.0;
  const double cap = plus ? split.cap_plus : split.cap_minus;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < alpha_i.size(); ++i) {
    if (y(static_cast<Eigen::Index>(i)) == side && std::abs(ystar[i]) <= cap) pool.push_back(i);
  }
  if (pool.empty()) {
    for (std::size_t i = 0; i < alpha_i.size(); ++i) {
      if (y(static_cast<Eigen::Index>(i)) == side) pool.push_back(i);
    }
  }
  if (pool.empty()) {
    pool.resize(alpha_i.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return alpha_i[pool[pick(rng)]];
}

std::vector<double> solve_link_constraint(std::span<const double> fhat_vals,
                                          std::span<const double> p_link) {
  if (fhat_vals.size() != p_link.size()) {
    throw ValidationError("link constraint: fhat and link probability lengths differ");
  }
  std::vector<double> alpha(fhat_vals.size());
  for (std::size_t i = 0; i < fhat_vals.size(); ++i) {
    const double f = fhat_vals[i];
    const double p = p_link[i];
    if (!(f >= SmoothedECDF::kClampLow && f <= SmoothedECDF::kClampHigh)) {
      std::ostringstream msg;
      msg << "link constraint: fhat value " << f << " at observation " << i
          << " is outside the clamp band";
      throw ValidationError(msg.str());
    }
    if (!(p >= kProbFloor && p <= 1.0 - kProbFloor)) {
      std::ostringstream msg;
      msg << "link constraint: link probability " << p << " at observation " << i
          << " is outside the clamp band";
      throw ValidationError(msg.str());
    }
    alpha[i] = std::log(p) / std::log(f);
  }
  return alpha;
}

AlphaUpdate update_alpha_star(std::span<const double> fhat_vals, std::span<const double> p_link,
                              const Vector& y, std::span<const double> ystar,
                              const SignedMeasureSplit& split, Rng& rng, const AlphaStarKernel& kernel) {
  if (static_cast<Eigen::Index>(fhat_vals.size()) != y.size()) {
    throw ValidationError("update_alpha_star: response length differs from fhat length");
  }
  AlphaUpdate out;
  out.alpha_i = solve_link_constraint(fhat_vals, p_link);
  out.alpha_star = kernel(out.alpha_i, y, ystar, split, rng);
  if (!(out.alpha_star > 0.0) || !std::isfinite(out.alpha_star)) {
    throw NumericalError("update_alpha_star: alpha* is not a finite positive value");
  }
  return out;
}

namespace {

double implied_success(const SmoothedECDF& fhat, double eta) {
  return std::clamp(1.0 - fhat.raw_cdf(-eta), SmoothedECDF::kClampLow, SmoothedECDF::kClampHigh);
}

}  // namespace

Vector latent_success_probability(const Matrix& X, const Vector& beta, const SmoothedECDF& fhat,
                                  double alpha_star) {
  const Vector eta = linear_predictor(X, beta);
  Vector q(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    q(i) = clamp_probability(std::pow(implied_success(fhat, eta(i)), alpha_star));
  }
  return q;
}

double latent_log_likelihood(const BinaryDataset& data, const Vector& beta,
                             const SmoothedECDF& fhat, double alpha_star) {
  const Vector q = latent_success_probability(data.X(), beta, fhat, alpha_star);
  const Vector& y = data.y();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    ll += y(i) == 1.0 ? std::log(q(i)) : std::log1p(-q(i));
  }
  return ll;
}

double laheml_log_target(const BinaryDataset& data, const Vector& beta, const SmoothedECDF& fhat,
                         double alpha_star, const ShrinkState* shrink) {
  double lt = latent_log_likelihood(data, beta, fhat, alpha_star);
  if (shrink != nullptr) lt += laplace_log_prior(beta, *shrink);
  return lt;
}

double metropolis_acceptance(double log_ratio) {
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

bool metropolis_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(uniform_open(rng)) < log_ratio;
}

MhOutcome mh_step_beta(const LatentState& state, const BinaryDataset& data, const Vector& proposal,
                       const ShrinkState* shrink, Rng& rng) {
  const double current =
      laheml_log_target(data, state.beta, state.fhat, state.alpha_star, shrink);
  if (!std::isfinite(current)) throw NumericalError("mh_step_beta: non-finite log target at current state");
  const double candidate = laheml_log_target(data, proposal, state.fhat, state.alpha_star, shrink);
  const double log_ratio = std::isfinite(candidate) ? candidate - current : -HUGE_VAL;
  MhOutcome out;
  out.acceptance_probability = metropolis_acceptance(log_ratio);
  out.accepted = metropolis_accept(log_ratio, rng);
  out.beta = out.accepted ? proposal : state.beta;
  return out;
}

MhOutcome mh_step_beta(const LatentState& state, const BinaryDataset& data,
                       const RandomWalkProposal& proposal, const ShrinkState* shrink, Rng& rng) {
  Vector z(state.beta.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = standard_normal(rng);
  const Vector candidate = state.beta + proposal.scale * state.latent_scale * (proposal.chol * z);
  return mh_step_beta(state, data, candidate, shrink, rng);
}

void LahemlOptions::validate() const {
  mcmc.validate();
  if (const auto* k = std::get_if<KappaFixed>(&kappa_mode)) {
    if (!(k->value > 0.0 && k->value < 1.0)) throw ValidationError("kappa must be in (0,1)");
  }
  if (!(min_latent_scale > 0.0) || !(max_latent_scale >= min_latent_scale)) {
    throw ValidationError("latent scale band must satisfy 0 < min <= max");
  }
  if (!(scale_step >= 0.0)) throw ValidationError("scale_step must be >= 0");
  if (!(refresh_bandwidth_factor > 0.0 && refresh_bandwidth_factor <= 1.0)) {
    throw ValidationError("refresh_bandwidth_factor must be in (0,1]");
  }
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ValidationError("target_acceptance must be in (0,1)");
  }
  if (!(shrink_r > 0.0) || !(shrink_delta > 0.0)) {
    throw ValidationError("shrinkage hyperparameters must be positive");
  }
  if (!alpha_kernel) throw ValidationError("alpha kernel must be set");
  if (model_snapshots < 1) throw ValidationError("model_snapshots must be >= 1");
}

double kappa_value(const KappaMode& mode, const Vector& y) {
  if (const auto* k = std::get_if<KappaFixed>(&mode)) return k->value;
  return std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
}

namespace {

// Smoothed CDF of the residuals, recentred to mean zero and rescaled so the
// smoothed distribution (support spread plus kernel) has sd `scale`. The
// kernel is `bandwidth_factor` times the Silverman bandwidth.
SmoothedECDF normalized_latent_cdf(std::vector<double> residuals, double scale,
                                   double bandwidth_factor) {
  const double n = static_cast<double>(residuals.size());
  const double m = mean(residuals);
  double ss = 0.0;
  for (double r : residuals) ss += (r - m) * (r - m);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) throw NumericalError("latent residuals collapsed to a point");
  if (bandwidth_factor == 1.0) {
    const double h_ratio = 1.06 * std::sqrt(n / (n - 1.0)) * std::pow(n, -0.2);
    const double target = scale / std::sqrt(1.0 + h_ratio * h_ratio);
    for (double& r : residuals) r = (r - m) * (target / sd);
    return estimate_latent_cdf(residuals);
  }
  const double h_ratio = bandwidth_factor * 1.06 * std::sqrt(n / (n - 1.0)) * std::pow(n, -0.2);
  const double target = scale / std::sqrt(1.0 + h_ratio * h_ratio);
  for (double& r : residuals) r = (r - m) * (target / sd);
  return {std::move(residuals), h_ratio * target};
}

struct Start {
  Vector gamma;
  Matrix chol;
};

Start starting_point(const BinaryDataset& data) {
  const double logistic_sd = link_latent_sd(LinkFamily::Logit);
  const auto p = data.n_coef();
  Start s;
  try {
    const MleFit mle = fit_mle_logit(data);
    s.gamma = mle.result.beta_mean / logistic_sd;
    const Eigen::LLT<Matrix> llt(mle.covariance / (logistic_sd * logistic_sd));
    if (llt.info() == Eigen::Success) {
      s.chol = llt.matrixL();
      return s;
    }
  } catch (const NumericalError&) {
  }
  s.gamma = Vector::Zero(p);
  const double ybar = std::clamp(data.success_share(), 1e-3, 1.0 - 1e-3);
  s.gamma(0) = std::log(ybar / (1.0 - ybar)) / logistic_sd;
  const Matrix xtx = data.X().transpose() * data.X() + 1e-6 * Matrix::Identity(p, p);
  const Matrix cov = xtx.ldlt().solve(Matrix::Identity(p, p)) * 4.0 / (logistic_sd * logistic_sd);
  s.chol = Eigen::LLT<Matrix>(cov).matrixL();
  return s;
}

std::string at_iteration(const std::string& what, int it) {
  return what + " (iteration " + std::to_string(it) + ")";
}

}  // namespace

LahemlFit run_laheml(const BinaryDataset& data, const LahemlOptions& opts) {
  opts.validate();
  const Matrix& X = data.X();
  const Vector& y = data.y();
  const auto n = data.n();
  const auto p = data.n_coef();
  if (n < 10) throw ValidationError("LAHEML needs at least 10 observations");

  Rng rng(opts.mcmc.seed);
  const double kappa = kappa_value(opts.kappa_mode, y);
  const double log_min = std::log(opts.min_latent_scale);
  const double log_max = std::log(opts.max_latent_scale);

  const Start start = starting_point(data);
  const double scale0 = std::clamp(link_latent_sd(LinkFamily::Logit), opts.min_latent_scale,
                                   opts.max_latent_scale);
  std::vector<double> logistic_quantiles(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    logistic_quantiles[static_cast<std::size_t>(i)] = std::log(u / (1.0 - u));
  }
  LatentState state{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                    scale0 * start.gamma,
                    1.0,
                    kappa,
                    scale0,
                    normalized_latent_cdf(logistic_quantiles, scale0, opts.refresh_bandwidth_factor)};

  RandomWalkProposal proposal{start.chol, opts.mcmc.proposal_scale * 2.38 / std::sqrt(static_cast<double>(p))};
  std::optional<ShrinkState> shrink;
  if (opts.penalized) shrink = ShrinkState::initial(p - 1, opts.shrink_r, opts.shrink_delta);

  LahemlFit fit;
  fit.kappa = kappa;
  fit.chain.columns = data.column_names();
  fit.chain.columns.push_back("alpha_star");
  if (opts.penalized) {
    for (Eigen::Index k = 1; k < p; ++k) fit.chain.columns.push_back("lambda_" + data.column_names()[static_cast<std::size_t>(k)]);
  }

  std::vector<double> residuals(static_cast<std::size_t>(n));
  std::vector<double> fhat_vals(static_cast<std::size_t>(n));
  std::vector<double> p_link(static_cast<std::size_t>(n));
  std::vector<double> alpha_draws;
  Vector gamma_sum = Vector::Zero(p);
  long accepted = 0;
  long retained_steps = 0;
  const int n_retained = (opts.mcmc.n_iters - opts.mcmc.n_burnin + opts.mcmc.thin - 1) / opts.mcmc.thin;
  const int snapshot_every = std::max(1, n_retained / std::max(1, opts.model_snapshots));
  std::vector<double> pooled_support;
  double pooled_bandwidth = 0.0;
  int snapshots = 0;
  double fhat_zero_sum = 0.0;

  for (int it = 0; it < opts.mcmc.n_iters; ++it) {
    // (1) latent data augmentation
    Vector eta = X * state.beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto d = draw_latent(static_cast<int>(y(i)), eta(i), state.fhat, rng);
      if (d.fallback) ++fit.fallback_draws;
      if (!std::isfinite(d.value)) throw NumericalError(at_iteration("non-finite latent draw", it));
      state.ystar[static_cast<std::size_t>(i)] = d.value;
      residuals[static_cast<std::size_t>(i)] = d.value - eta(i);
    }
    // (2) refresh the residual distribution
    state.fhat = normalized_latent_cdf(residuals, state.latent_scale, opts.refresh_bandwidth_factor);

    // (3) signed-measure split at kappa
    const SignedMeasureSplit split = jordan_split(state.ystar, kappa);

    // (4) link-constraint exponent
    for (Eigen::Index i = 0; i < n; ++i) {
      fhat_vals[static_cast<std::size_t>(i)] = implied_success(state.fhat, eta(i));
      p_link[static_cast<std::size_t>(i)] =
          standardized_inverse_link(opts.reference_family, eta(i) / state.latent_scale);
    }
    state.alpha_star = update_alpha_star(fhat_vals, p_link, y, state.ystar, split, rng, opts.alpha_kernel).alpha_star;

    // Joint rescaling of (beta, fhat); leaves the likelihood unchanged.
    if (opts.scale_step > 0.0 && log_max > log_min) {
      double log_s = std::log(state.latent_scale) + opts.scale_step * standard_normal(rng);
      const double width = log_max - log_min;
      // Reflect into the band.
      double off = std::fmod(log_s - log_min, 2.0 * width);
      if (off < 0.0) off += 2.0 * width;
      log_s = log_min + (off <= width ? off : 2.0 * width - off);
      const double ratio = std::exp(log_s) / state.latent_scale;
      const Vector beta_new = state.beta * ratio;
      const double log_ratio =
          shrink ? laplace_log_prior(beta_new, *shrink) - laplace_log_prior(state.beta, *shrink) : 0.0;
      if (metropolis_accept(log_ratio, rng)) {
        state.beta = beta_new;
        state.fhat = state.fhat.scaled(ratio);
        state.latent_scale *= ratio;
      }
    }

    // (5) Metropolis update of beta
    const MhOutcome mh = mh_step_beta(state, data, proposal, shrink ? &*shrink : nullptr, rng);
    state.beta = mh.beta;
    if (!state.beta.allFinite()) throw NumericalError(at_iteration("non-finite coefficients", it));
    if (it < opts.mcmc.n_burnin) {
      const double gain = std::pow(static_cast<double>(it) + 1.0, -0.6);
      proposal.scale *= std::exp(gain * ((mh.accepted ? 1.0 : 0.0) - opts.target_acceptance));
    }

    // (6) adaptive-lasso rates
    if (shrink) shrink = update_shrinkage(state.beta, *shrink, rng);

    if (it >= opts.mcmc.n_burnin) {
      ++retained_steps;
      if (mh.accepted) ++accepted;
      if ((it - opts.mcmc.n_burnin) % opts.mcmc.thin != 0) continue;
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((state.ystar[static_cast<std::size_t>(i)] >= 0.0) != (y(i) == 1.0)) fit.sign_consistent = false;
      }
      if (split.s_plus.size() + split.s_minus.size() != static_cast<std::size_t>(n) ||
          std::abs(split.nu_plus + split.nu_minus - 1.0) > 1e-12 || split.nu_plus < 0.0 ||
          split.nu_minus < 0.0) {
        fit.split_valid = false;
      }
      std::vector<double> row(state.beta.data(), state.beta.data() + p);
      row.push_back(state.alpha_star);
      if (shrink) row.insert(row.end(), shrink->lambda.data(), shrink->lambda.data() + shrink->lambda.size());
      fit.chain.rows.push_back(std::move(row));
      fit.latent_scale_trace.push_back(state.latent_scale);
      alpha_draws.push_back(state.alpha_star);
      gamma_sum += state.beta / state.latent_scale;
      const auto kept_index = static_cast<int>(fit.chain.rows.size()) - 1;
      if (kept_index % snapshot_every == snapshot_every - 1 && snapshots < opts.model_snapshots) {
        for (double v : state.fhat.support()) pooled_support.push_back(v / state.latent_scale);
        pooled_bandwidth += state.fhat.bandwidth() / state.latent_scale;
        ++snapshots;
      }
      fhat_zero_sum += state.fhat.cdf(0.0);
    }
  }

  const auto kept = static_cast<double>(fit.chain.rows.size());
  fit.result = summarize_chain(fit.chain, static_cast<std::size_t>(p), opts.level,
                               opts.penalized ? "laheml-pen" : "laheml");
  fit.result.n_iters = opts.mcmc.n_iters;
  fit.result.n_burnin = opts.mcmc.n_burnin;
  fit.acceptance_rate = retained_steps > 0 ? static_cast<double>(accepted) / static_cast<double>(retained_steps) : 0.0;
  fit.final_proposal_scale = proposal.scale;
  fit.fhat_at_zero = fhat_zero_sum / kept;

  fit.model.gamma = gamma_sum / kept;
  if (snapshots == 0) {
    for (double v : state.fhat.support()) pooled_support.push_back(v / state.latent_scale);
    pooled_bandwidth = state.fhat.bandwidth() / state.latent_scale;
    snapshots = 1;
  }
  std::sort(pooled_support.begin(), pooled_support.end());
  fit.model.unit_support = std::move(pooled_support);
  fit.model.unit_bandwidth = pooled_bandwidth / snapshots;
  fit.model.alpha_star = quantile_unsorted(alpha_draws, 0.5);
  fit.model.cutoff = kappa;
  return fit;
}

}  // namespace npglm
