#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace npglm {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

struct SimulateConfig {
  std::vector<std::string> dgps{"logit", "probit", "cloglog"};
  std::vector<std::string> forms{"linear", "mixed", "nonlinear"};
  std::vector<int> sizes{100, 500, 1000, 2000};
  std::vector<double> balances{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> methods{"mle-logit", "pen-logit", "albert-chib", "laheml", "laheml-pen"};
  std::vector<double> slopes{1.0, 1.0};
  bool nuisance = false;
  int replications = 20;
  std::uint64_t seed = 1;
  int iters = 5000;
  int burnin = 2500;
  int bootstrap = 200;
  double level = 0.99;
  std::string kappa = "observed";
  std::string reference = "logit";
  int threads = 1;
  bool chains = true;
  std::string output_dir;
};

struct FitConfig {
  std::string input;
  std::string response;
  std::optional<double> threshold;
  std::vector<std::string> predictors;
  std::vector<std::string> transforms;
  std::string method = "laheml";
  std::string reference = "logit";
  std::string kappa = "observed";
  int iters = 5000;
  int burnin = 2500;
  int bootstrap = 200;
  std::uint64_t seed = 1;
  double level = 0.99;
  std::string split;  // empty: no held-out part
  std::string delimiter = "auto";
  std::string output_dir;
};

struct DiagnoseConfig {
  std::string model;
  std::string input;
  std::string family = "logit";
  double level = 0.01;
  std::string delimiter = "auto";
  std::string output_dir;
};

struct ArsConfig {
  std::vector<std::string> inputs;
  bool paired = false;
  double epsilon = 0.5;
  std::string output_dir;
};

struct SplitConfig {
  std::string input;
  std::string rule;
  std::uint64_t seed = 1;
  std::string response;
  std::optional<double> threshold;
  std::string delimiter = "auto";
  std::string output_dir;
};

// Each returns an ExitCode and reports problems on `err`.
int cmd_simulate(const SimulateConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_fit(const FitConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_diagnose(const DiagnoseConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_ars(const ArsConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_split(const SplitConfig& cfg, std::ostream& out, std::ostream& err);

// Parses `args` (without the program name) and dispatches.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace npglm
