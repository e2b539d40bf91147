#pragma once

// Uniform entry point over the fitting methods used by the grid runner and
// the CLI.

#include "npglm/baselines.hpp"
#include "npglm/laheml.hpp"
#include "npglm/predictive.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace npglm {

enum class Method { MleLogit, PenLogit, AlbertChib, Laheml, LahemlPen };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
const std::vector<Method>& all_methods();

struct MethodSettings {
  McmcOptions mcmc;
  double level = kDefaultLevel;
  int bootstrap = 200;
  KappaMode kappa_mode = KappaObservedProportion{};
  LinkFamily reference_family = LinkFamily::Logit;
};

struct MethodFit {
  FitResult result;
  ProbabilityModel model;
  std::optional<Chain> chain;
  // Mean retained fhat(0) on the unit latent scale; LAHEML methods only.
  std::optional<double> fhat_at_zero;
};

MethodFit fit_method(Method method, const BinaryDataset& data, const MethodSettings& settings);

}  // namespace npglm
