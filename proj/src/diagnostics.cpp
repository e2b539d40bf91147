#include "npglm/diagnostics.hpp"

#include "npglm/stats.hpp"

#include <cmath>
#include <sstream>

namespace npglm {

std::string_view to_string(Decision d) {
  return d == Decision::Adequate ? "Adequate" : "Inadequate";
}

namespace {

// Candidate family's success probability at each row. A parametric fit of
// the same family keeps its own index so the two probabilities agree bit
// for bit.
Vector candidate_probability(const ProbabilityModel& fit, const Matrix& X, LinkFamily family) {
  Vector eta;
  if (const auto* m = std::get_if<ParametricModel>(&fit); m != nullptr && m->family == family) {
    eta = linear_predictor(X, m->beta);
  } else {
    eta = link_latent_mean(family) + link_latent_sd(family) * unit_index(fit, X).array();
  }
  Vector p(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) p(i) = inverse_link(family, eta(i));
  return p;
}

}  // namespace

std::vector<double> alpha_star_profile(const ProbabilityModel& fit, const Matrix& X,
                                       LinkFamily family) {
  std::vector<Eigen::Index> bad;
  const Vector z = unit_index(fit, X);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z(i))) bad.push_back(i);
  }
  const auto report = [&bad] {
    std::ostringstream msg;
    msg << "alpha profile: probabilities outside the clamp band at rows";
    for (std::size_t k = 0; k < bad.size() && k < 20; ++k) msg << ' ' << bad[k];
    if (bad.size() > 20) msg << " ... (" << bad.size() << " rows)";
    throw ValidationError(msg.str());
  };
  if (!bad.empty()) report();
  const Vector f = success_probability(fit, X);
  const Vector p = candidate_probability(fit, X, family);
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const bool ok = f(i) >= kProbFloor && f(i) <= 1.0 - kProbFloor && p(i) >= kProbFloor &&
                    p(i) <= 1.0 - kProbFloor;
    if (!ok) bad.push_back(i);
  }
  if (!bad.empty()) report();
  std::vector<double> alpha(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    alpha[static_cast<std::size_t>(i)] = f(i) == p(i) ? 1.0 : std::log(p(i)) / std::log(f(i));
  }
  return alpha;
}

DiagnosticReport alpha_star_test(std::vector<double> alpha_i, double level) {
  if (alpha_i.size() < kMinDiagnosticSize) {
    throw ValidationError("alpha* test needs at least " + std::to_string(kMinDiagnosticSize) +
                          " observations, got " + std::to_string(alpha_i.size()));
  }
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("significance level must be in (0,1)");
  DiagnosticReport r;
  r.level = level;
  const double n = static_cast<double>(alpha_i.size());
  double ss = 0.0;
  for (double a : alpha_i) {
    if (!std::isfinite(a)) throw ValidationError("alpha* test: non-finite alpha value");
    ss += (a - 1.0) * (a - 1.0);
  }
  r.alpha_bar = mean(alpha_i);
  r.variance_hat = ss / (n - 1.0);
  if (r.variance_hat > 0.0) {
    r.t_stat = (r.alpha_bar - 1.0) / std::sqrt(r.variance_hat / n);
    r.p_value = two_sided_normal_p(r.t_stat);
  }
  r.decision = r.p_value < level ? Decision::Inadequate : Decision::Adequate;
  r.alpha_i = std::move(alpha_i);
  return r;
}

}  // namespace npglm
