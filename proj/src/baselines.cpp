#include "npglm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace npglm {

void McmcOptions::validate() const {
  if (n_iters <= 0) throw ValidationError("n_iters must be positive");
  if (n_burnin < 0 || n_burnin >= n_iters) {
    throw ValidationError("n_burnin must satisfy 0 <= n_burnin < n_iters");
  }
  if (!(proposal_scale > 0.0) || !std::isfinite(proposal_scale)) {
    throw ValidationError("proposal_scale must be positive");
  }
  if (thin < 1) throw ValidationError("thin must be at least 1");
}

std::vector<double> Chain::column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(j));
  return out;
}

double central_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("interval level must be in (0,1)");
  return normal_cquantile((1.0 - level) / 2.0);
}

FitResult summarize_chain(const Chain& chain, std::size_t n_coef, double level,
                          std::string method_tag) {
  if (chain.rows.empty()) throw ValidationError("cannot summarize an empty chain");
  if (n_coef > chain.columns.size()) throw ValidationError("chain has too few columns");
  FitResult fit;
  fit.method_tag = std::move(method_tag);
  fit.column_names.assign(chain.columns.begin(),
                          chain.columns.begin() + static_cast<std::ptrdiff_t>(n_coef));
  const auto p = static_cast<Eigen::Index>(n_coef);
  fit.beta_mean.resize(p);
  fit.ci_low.resize(p);
  fit.ci_high.resize(p);
  const double tail = (1.0 - level) / 2.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    auto col = chain.column(static_cast<std::size_t>(j));
    fit.beta_mean(j) = mean(col);
    std::sort(col.begin(), col.end());
    fit.ci_low(j) = quantile(col, tail);
    fit.ci_high(j) = quantile(col, 1.0 - tail);
  }
  return fit;
}

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logistic(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

double logit_loglik(const BinaryDataset& data, const Vector& beta) {
  const Vector eta = linear_predictor(data.X(), beta);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += data.y()(i) * eta(i) - softplus(eta(i));
  return ll;
}

MleFit fit_mle_logit(const BinaryDataset& data, const MleOptions& opts) {
  const Matrix& X = data.X();
  const Vector& y = data.y();
  const auto p = X.cols();
  // Coefficients beyond this are taken as evidence of (quasi-)separation.
  constexpr double kDivergence = 30.0;

  MleFit out;
  Vector beta = Vector::Zero(p);
  double ll = logit_loglik(data, beta);
  out.loglik_trace.push_back(ll);
  Matrix info(p, p);
  bool converged = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vector eta = X * beta;
    Vector mu(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu(i) = logistic(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    const Vector grad = X.transpose() * (y - mu);
    info = X.transpose() * w.asDiagonal() * X;
    if (grad.norm() < opts.grad_tol) {
      converged = true;
      out.iterations = it;
      break;
    }
    Eigen::LDLT<Matrix> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      if (beta.cwiseAbs().maxCoeff() > kDivergence / 2) {
        throw NumericalError("MLE logit: separation detected (diverging coefficients); "
                             "use the penalized fit");
      }
      throw NumericalError("MLE logit: singular information matrix");
    }
    const Vector step = ldlt.solve(grad);
    double t = 1.0;
    Vector candidate = beta + step;
    double ll_new = logit_loglik(data, candidate);
    for (int h = 0; h < 40 && !(ll_new >= ll - 1e-12 * std::abs(ll)); ++h) {
      t *= 0.5;
      candidate = beta + t * step;
      ll_new = logit_loglik(data, candidate);
    }
    if (!(ll_new >= ll - 1e-12 * std::abs(ll))) {
      out.iterations = it;
      break;
    }
    beta = candidate;
    ll = std::max(ll, ll_new);
    out.loglik_trace.push_back(ll_new);
    out.iterations = it + 1;
    if (beta.cwiseAbs().maxCoeff() > kDivergence) {
      throw NumericalError("MLE logit: separation detected (coefficient norm diverging); "
                           "use the penalized fit");
    }
  }
  if (!converged) {
    const Vector eta = X * beta;
    Vector mu(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) mu(i) = logistic(eta(i));
    if ((X.transpose() * (y - mu)).norm() > 1e-4) {
      throw NumericalError("MLE logit: Newton iterations did not converge");
    }
  }
  // A linear predictor that strictly orders the classes is a separating
  // hyperplane, so no finite maximizer exists.
  {
    const Vector eta = X * beta;
    double min_one = std::numeric_limits<double>::infinity();
    double max_zero = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      if (y(i) == 1.0) min_one = std::min(min_one, eta(i));
      else max_zero = std::max(max_zero, eta(i));
    }
    if (min_one > max_zero) {
      throw NumericalError("MLE logit: separation detected (classes perfectly separated); use the penalized fit");
    }
  }
  Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("MLE logit: singular information matrix");
  }
  out.covariance = ldlt.solve(Matrix::Identity(p, p));
  const double z = central_z(opts.level);
  FitResult& fit = out.result;
  fit.method_tag = "mle-logit";
  fit.column_names = data.column_names();
  fit.beta_mean = beta;
  fit.ci_low.resize(p);
  fit.ci_high.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double se = std::sqrt(std::max(0.0, out.covariance(j, j)));
    fit.ci_low(j) = beta(j) - z * se;
    fit.ci_high(j) = beta(j) + z * se;
  }
  return out;
}

namespace {

// Centered and scaled copy of the slopes; the L1 problem is solved in these
// coordinates with per-coordinate penalty weights lambda / scale_j, which is
// the same optimization problem as penalizing raw coefficients.
struct StandardizedDesign {
  Matrix Z;  // intercept column then standardized covariates
  Vector center;
  Vector scale;

  explicit StandardizedDesign(const Matrix& X) : Z(X), center(X.cols()), scale(X.cols()) {
    center(0) = 0.0;
    scale(0) = 1.0;
    const double n = static_cast<double>(X.rows());
    for (Eigen::Index j = 1; j < X.cols(); ++j) {
      const double m = X.col(j).mean();
      double sd = std::sqrt((X.col(j).array() - m).square().sum() / n);
      if (!(sd > 0.0)) sd = 1.0;
      center(j) = m;
      scale(j) = sd;
      Z.col(j) = (X.col(j).array() - m) / sd;
    }
  }

  Vector to_std(const Vector& beta) const {
    Vector b = beta.cwiseProduct(scale);
    b(0) = beta(0) + beta.tail(beta.size() - 1).dot(center.tail(center.size() - 1));
    return b;
  }

  Vector to_raw(const Vector& b) const {
    Vector beta = b.cwiseQuotient(scale);
    beta(0) = b(0) - beta.tail(beta.size() - 1).dot(center.tail(center.size() - 1));
    return beta;
  }
};

double mean_logit_loss(const Matrix& Z, const Vector& y, const Vector& b) {
  const Vector eta = Z * b;
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) s += softplus(eta(i)) - y(i) * eta(i);
  return s / static_cast<double>(eta.size());
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Proximal Newton: each outer step solves the L1-penalized IRLS quadratic by
// cyclic coordinate descent, then backtracks on the exact objective.
Vector proximal_newton(const Matrix& Z, const Vector& y, const Vector& weights, Vector b,
                       int max_iter, double tol) {
  const double n = static_cast<double>(Z.rows());
  const auto p = Z.cols();
  auto objective = [&](const Vector& v) {
    return mean_logit_loss(Z, y, v) + weights.cwiseProduct(v).cwiseAbs().sum();
  };
  double f = objective(b);
  for (int outer = 0; outer < max_iter; ++outer) {
    const Vector eta = Z * b;
    Vector w(eta.size());
    Vector work(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double mu = logistic(eta(i));
      w(i) = std::max(mu * (1.0 - mu), 1e-6);
      work(i) = eta(i) + (y(i) - mu) / w(i);
    }
    const Matrix H = Z.transpose() * w.asDiagonal() * Z / n;
    const Vector g = Z.transpose() * w.cwiseProduct(work) / n;
    Vector c = b;
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double delta = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double r = g(j) - H.row(j).dot(c) + H(j, j) * c(j);
        const double v = soft_threshold(r, weights(j)) / H(j, j);
        delta = std::max(delta, std::abs(v - c(j)));
        c(j) = v;
      }
      if (delta < 0.1 * tol) break;
    }
    Vector dir = c - b;
    double step = 1.0;
    Vector next = b + dir;
    double f_next = objective(next);
    while (f_next > f + 1e-15 * std::abs(f) && step > 1e-10) {
      step *= 0.5;
      next = b + step * dir;
      f_next = objective(next);
    }
    const double change = (next - b).cwiseAbs().maxCoeff();
    if (f_next <= f + 1e-15 * std::abs(f)) {
      b = next;
      f = f_next;
    }
    if (change < tol * std::max(1.0, b.cwiseAbs().maxCoeff())) break;
  }
  return b;
}

Vector penalty_weights(const StandardizedDesign& sd, double lambda) {
  Vector w(sd.scale.size());
  w(0) = 0.0;
  for (Eigen::Index j = 1; j < w.size(); ++j) w(j) = lambda / sd.scale(j);
  return w;
}

Vector intercept_only_start(const Vector& y, Eigen::Index p) {
  Vector b = Vector::Zero(p);
  const double ybar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  b(0) = std::log(ybar / (1.0 - ybar));
  return b;
}

bool has_both_classes(const Vector& y) {
  const double s = y.sum();
  return s > 0.0 && s < static_cast<double>(y.size());
}

}  // namespace

double penalized_logit_lambda_max(const BinaryDataset& data) {
  const Vector& y = data.y();
  const double ybar = y.mean();
  const double n = static_cast<double>(data.n());
  double lmax = 0.0;
  for (Eigen::Index j = 1; j < data.n_coef(); ++j) {
    lmax = std::max(lmax, std::abs(data.X().col(j).dot(y.array().matrix() - Vector::Constant(y.size(), ybar))) / n);
  }
  return lmax;
}

Vector penalized_logit_path_point(const BinaryDataset& data, double lambda,
                                  const std::optional<Vector>& start, int max_iter, double tol) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
  const StandardizedDesign sd(data.X());
  Vector b = start ? sd.to_std(*start) : intercept_only_start(data.y(), data.n_coef());
  b = proximal_newton(sd.Z, data.y(), penalty_weights(sd, lambda), b, max_iter, tol);
  return sd.to_raw(b);
}

double select_lambda_cv(const BinaryDataset& data, const PenalizedOptions& opts) {
  if (opts.cv_folds < 2) throw ValidationError("cv_folds must be at least 2");
  if (opts.cv_grid < 2) throw ValidationError("cv_grid must be at least 2");
  const auto n = data.n();
  const double lmax = std::max(penalized_logit_lambda_max(data), 1e-8);
  std::vector<double> grid(static_cast<std::size_t>(opts.cv_grid));
  for (int g = 0; g < opts.cv_grid; ++g) {
    grid[static_cast<std::size_t>(g)] = lmax * std::pow(10.0, -3.0 * g / (opts.cv_grid - 1));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(derive_seed(opts.seed, 0xcf));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> deviance(grid.size(), 0.0);
  for (int fold = 0; fold < opts.cv_folds; ++fold) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t r = 0; r < order.size(); ++r) {
      (static_cast<int>(r % static_cast<std::size_t>(opts.cv_folds)) == fold ? test : train)
          .push_back(order[r]);
    }
    const BinaryDataset tr = data.subset(train);
    const BinaryDataset te = data.subset(test);
    if (!has_both_classes(tr.y())) continue;
    std::optional<Vector> warm;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Vector beta = penalized_logit_path_point(tr, grid[g], warm, opts.max_iter, 1e-7);
      warm = beta;
      deviance[g] += -2.0 * logit_loglik(te, beta);
    }
  }
  const auto best = std::min_element(deviance.begin(), deviance.end()) - deviance.begin();
  return grid[static_cast<std::size_t>(best)];
}

PenalizedFit fit_penalized_logit(const BinaryDataset& data, const PenalizedOptions& opts) {
  if (opts.lambda && !(*opts.lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (opts.bootstrap < 2) throw ValidationError("bootstrap needs at least 2 resamples");
  PenalizedFit out;
  out.lambda = opts.lambda ? *opts.lambda : select_lambda_cv(data, opts);
  const Vector beta = penalized_logit_path_point(data, out.lambda, std::nullopt, opts.max_iter, opts.tol);

  const auto n = data.n();
  const auto p = data.n_coef();
  std::vector<std::vector<double>> boot(static_cast<std::size_t>(p));
  Rng rng(derive_seed(opts.seed, 0xb0));
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  for (int b = 0; b < opts.bootstrap; ++b) {
    BinaryDataset resample = data;
    for (int attempt = 0;; ++attempt) {
      for (auto& r : rows) r = pick(rng);
      resample = data.subset(rows);
      if (has_both_classes(resample.y())) break;
      if (attempt > 100) throw NumericalError("bootstrap resamples keep losing a class");
    }
    const Vector bb = penalized_logit_path_point(resample, out.lambda, beta, opts.max_iter, 1e-8);
    for (Eigen::Index j = 0; j < p; ++j) boot[static_cast<std::size_t>(j)].push_back(bb(j));
  }

  FitResult& fit = out.result;
  fit.method_tag = "pen-logit";
  fit.column_names = data.column_names();
  fit.beta_mean = beta;
  fit.ci_low.resize(p);
  fit.ci_high.resize(p);
  const double tail = (1.0 - opts.level) / 2.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& v = boot[static_cast<std::size_t>(j)];
    std::sort(v.begin(), v.end());
    // Percentile interval, widened if needed so it contains the estimate.
    fit.ci_low(j) = std::min(quantile(v, tail), beta(j));
    fit.ci_high(j) = std::max(quantile(v, 1.0 - tail), beta(j));
  }
  return out;
}

namespace {

// Draw z ~ N(0,1) conditioned on z >= a.
double upper_truncated_std_normal(double a, Rng& rng) {
  if (a < 30.0) {
    const double tail = normal_ccdf(a);
    const double z = normal_cquantile(uniform_open(rng) * tail);
    return std::max(z, a);
  }
  // Far tail: exact exponential-proposal rejection (Robert 1995).
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(uniform_open(rng)) / rate;
    if (std::log(uniform_open(rng)) <= -0.5 * (z - rate) * (z - rate)) return z;
  }
}

}  // namespace

double sample_truncated_normal(double mu, double sigma, TruncationSide side, Rng& rng) {
  if (!(sigma > 0.0)) throw ValidationError("truncated normal needs sigma > 0");
  if (side == TruncationSide::NonNegative) {
    const double z = upper_truncated_std_normal(-mu / sigma, rng);
    return std::max(0.0, mu + sigma * z);
  }
  const double z = upper_truncated_std_normal(mu / sigma, rng);
  const double x = mu - sigma * z;
  return x < 0.0 ? x : -std::numeric_limits<double>::min();
}

AlbertChibFit fit_albert_chib_probit(const BinaryDataset& data, const AlbertChibOptions& opts) {
  opts.mcmc.validate();
  if (!(opts.prior_variance > 0.0)) throw ValidationError("prior_variance must be positive");
  const Matrix& X = data.X();
  const Vector& y = data.y();
  const auto n = data.n();
  const auto p = data.n_coef();

  const Matrix precision = X.transpose() * X + Matrix::Identity(p, p) / opts.prior_variance;
  const Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("Albert-Chib: posterior precision not PD");
  const Matrix post_cov = llt.solve(Matrix::Identity(p, p));
  const Matrix post_chol = Eigen::LLT<Matrix>(post_cov).matrixL();

  Rng rng(opts.mcmc.seed);
  AlbertChibFit out;
  out.chain.columns = data.column_names();
  Vector beta = Vector::Zero(p);
  Vector z(n);
  Vector noise(p);
  double resid_ss = 0.0;
  double resid_count = 0.0;
  for (int it = 0; it < opts.mcmc.n_iters; ++it) {
    const Vector mu = X * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i) = sample_truncated_normal(
          mu(i), 1.0, y(i) == 1.0 ? TruncationSide::NonNegative : TruncationSide::Negative, rng);
      if (!std::isfinite(z(i))) {
        throw NumericalError("Albert-Chib: non-finite latent draw at iteration " + std::to_string(it));
      }
    }
    for (Eigen::Index j = 0; j < p; ++j) noise(j) = standard_normal(rng);
    beta = post_cov * (X.transpose() * z) + post_chol * noise;
    if (!beta.allFinite()) {
      throw NumericalError("Albert-Chib: non-finite coefficients at iteration " + std::to_string(it));
    }
    if (it >= opts.mcmc.n_burnin && (it - opts.mcmc.n_burnin) % opts.mcmc.thin == 0) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((z(i) >= 0.0) != (y(i) == 1.0)) out.sign_consistent = false;
      }
      const Vector resid = z - X * beta;
      const double rm = resid.mean();
      resid_ss += (resid.array() - rm).square().sum();
      resid_count += static_cast<double>(n - 1);
      out.chain.rows.emplace_back(beta.data(), beta.data() + p);
    }
  }
  out.latent_residual_variance = resid_ss / resid_count;
  out.result = summarize_chain(out.chain, static_cast<std::size_t>(p), opts.level, "albert-chib");
  out.result.n_iters = opts.mcmc.n_iters;
  out.result.n_burnin = opts.mcmc.n_burnin;
  return out;
}

}  // namespace npglm
