#include "npglm/methods.hpp"

#include <array>

namespace npglm {

namespace {
constexpr std::array<std::pair<Method, std::string_view>, 5> kNames{{
    {Method::MleLogit, "mle-logit"},
    {Method::PenLogit, "pen-logit"},
    {Method::AlbertChib, "albert-chib"},
    {Method::Laheml, "laheml"},
    {Method::LahemlPen, "laheml-pen"},
}};
}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [k, v] : kNames) {
    if (k == m) return v;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& [k, v] : kNames) {
    if (v == name) return k;
  }
  throw ValidationError("unknown method '" + std::string(name) +
                        "' (expected mle-logit, pen-logit, albert-chib, laheml or laheml-pen)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::MleLogit, Method::PenLogit, Method::AlbertChib,
                                           Method::Laheml, Method::LahemlPen};
  return methods;
}

MethodFit fit_method(Method method, const BinaryDataset& data, const MethodSettings& settings) {
  MethodFit out;
  switch (method) {
    case Method::MleLogit: {
      MleOptions o;
      o.level = settings.level;
      auto fit = fit_mle_logit(data, o);
      out.model = ParametricModel{LinkFamily::Logit, fit.result.beta_mean, 0.5};
      out.result = std::move(fit.result);
      break;
    }
    case Method::PenLogit: {
      PenalizedOptions o;
      o.level = settings.level;
      o.bootstrap = settings.bootstrap;
      o.seed = settings.mcmc.seed;
      auto fit = fit_penalized_logit(data, o);
      out.model = ParametricModel{LinkFamily::Logit, fit.result.beta_mean, 0.5};
      out.result = std::move(fit.result);
      break;
    }
    case Method::AlbertChib: {
      AlbertChibOptions o;
      o.mcmc = settings.mcmc;
      o.level = settings.level;
      auto fit = fit_albert_chib_probit(data, o);
      out.model = ParametricModel{LinkFamily::Probit, fit.result.beta_mean, 0.5};
      out.result = std::move(fit.result);
      out.chain = std::move(fit.chain);
      break;
    }
    case Method::Laheml:
    case Method::LahemlPen: {
      LahemlOptions o;
      o.mcmc = settings.mcmc;
      o.level = settings.level;
      o.penalized = method == Method::LahemlPen;
      o.kappa_mode = settings.kappa_mode;
      o.reference_family = settings.reference_family;
      auto fit = run_laheml(data, o);
      out.model = fit.model;
      out.fhat_at_zero = fit.fhat_at_zero;
      out.result = std::move(fit.result);
      out.chain = std::move(fit.chain);
      break;
    }
  }
  return out;
}

}  // namespace npglm
