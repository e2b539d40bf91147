#include "npglm/cli.hpp"

#include "npglm/ars.hpp"
#include "npglm/dgp_sim.hpp"
#include "npglm/diagnostics.hpp"
#include "npglm/io.hpp"
#include "npglm/methods.hpp"
#include "npglm/tabular.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace npglm {

namespace fs = std::filesystem;

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

void require_file(const std::string& path, const std::string& key) {
  if (path.empty()) throw ValidationError(key + ": path not set");
  if (!fs::is_regular_file(path)) throw ValidationError(key + ": file not found: " + path);
}

void require_output_dir(const std::string& path) {
  if (path.empty()) throw ValidationError("output-dir: path not set");
  if (fs::exists(path) && !fs::is_directory(path)) {
    throw ValidationError("output-dir: not a directory: " + path);
  }
}

void make_output_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create " + path + ": " + ec.message());
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::optional<char> parse_delimiter(const std::string& text) {
  if (text == "auto") return std::nullopt;
  if (text == "comma" || text == ",") return ',';
  if (text == "tab" || text == "\\t" || text == "\t") return '\t';
  throw ValidationError("delimiter must be auto, comma or tab");
}

KappaMode parse_kappa(const std::string& text) {
  if (text == "observed") return KappaObservedProportion{};
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && v > 0.0 && v < 1.0) return KappaFixed{v};
  } catch (const std::logic_error&) {
  }
  throw ValidationError("kappa must be 'observed' or a number in (0,1), got '" + text + "'");
}

void check_level(double level, const char* key) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError(std::string(key) + " must be in (0,1)");
}

MethodSettings method_settings(int iters, int burnin, std::uint64_t seed, double level, int bootstrap,
                               const std::string& kappa, const std::string& reference) {
  MethodSettings s;
  s.mcmc.n_iters = iters;
  s.mcmc.n_burnin = burnin;
  s.mcmc.seed = seed;
  s.mcmc.validate();
  check_level(level, "level");
  s.level = level;
  if (bootstrap < 2) throw ValidationError("bootstrap must be >= 2");
  s.bootstrap = bootstrap;
  s.kappa_mode = parse_kappa(kappa);
  s.reference_family = parse_link_family(reference);
  return s;
}

DesignSpec design_spec(const std::string& response, std::optional<double> threshold,
                       const std::vector<std::string>& predictors, const std::vector<std::string>& transforms) {
  DesignSpec d;
  d.response = response;
  d.threshold = threshold;
  d.predictors = predictors;
  for (const auto& t : transforms) d.transforms.push_back(parse_transform_spec(t));
  return d;
}

std::vector<int> labels(const Vector& y) {
  std::vector<int> out(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(y(i));
  return out;
}

}  // namespace

int cmd_simulate(const SimulateConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GridSpec spec;
    spec.dgps.clear();
    for (const auto& d : cfg.dgps) spec.dgps.push_back(parse_link_family(d));
    spec.forms.clear();
    for (const auto& f : cfg.forms) spec.forms.push_back(parse_model_form(f));
    spec.sizes = cfg.sizes;
    spec.balances = cfg.balances;
    spec.methods.clear();
    for (const auto& m : cfg.methods) spec.methods.push_back(parse_method(m));
    spec.slopes = cfg.slopes;
    spec.nuisance = cfg.nuisance;
    spec.replications = cfg.replications;
    spec.master_seed = cfg.seed;
    spec.settings = method_settings(cfg.iters, cfg.burnin, cfg.seed, cfg.level, cfg.bootstrap, cfg.kappa, cfg.reference);
    spec.threads = cfg.threads;
    require_output_dir(cfg.output_dir);
    if (cfg.chains) spec.chain_dir = in_dir(cfg.output_dir, "chains");
    spec.validate();

    make_output_dir(cfg.output_dir);
    if (cfg.chains) make_output_dir(spec.chain_dir);
    const SimReport report = run_grid(spec);
    write_atomic(in_dir(cfg.output_dir, "report.csv"), format_sim_report(report));
    out << "wrote " << report.rows.size() << " rows to " << in_dir(cfg.output_dir, "report.csv") << '\n';
    if (report.all_succeeded()) return kExitOk;
    std::string failures;
    for (const SimRow& r : report.rows) {
      for (const auto& f : r.failures) {
        std::ostringstream line;
        line << to_string(r.dgp) << ',' << to_string(r.form) << ",n=" << r.n << ",balance=" << r.balance << ','
             << to_string(r.method) << ": " << f << '\n';
        failures += line.str();
      }
    }
    write_atomic(in_dir(cfg.output_dir, "failures.txt"), failures);
    err << "failed cells:\n" << failures;
    return kExitRuntime;
  });
}

int cmd_fit(const FitConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(cfg.input, "input");
    require_output_dir(cfg.output_dir);
    const Method method = parse_method(cfg.method);
    const MethodSettings settings =
        method_settings(cfg.iters, cfg.burnin, cfg.seed, cfg.level, cfg.bootstrap, cfg.kappa, cfg.reference);
    const DesignSpec design = design_spec(cfg.response, cfg.threshold, cfg.predictors, cfg.transforms);
    const auto delimiter = parse_delimiter(cfg.delimiter);
    std::optional<SplitRule> rule;
    if (!cfg.split.empty()) rule = parse_split_rule(cfg.split, cfg.seed);

    const BinaryDataset data = build_dataset(read_numeric_table(cfg.input, delimiter), design);
    std::optional<BinaryDataset> train;
    std::optional<BinaryDataset> test;
    if (rule) {
      auto parts = split_train_test(data, *rule);
      train = std::move(parts.first);
      test = std::move(parts.second);
    } else {
      train = data;
    }

    const MethodFit fit = fit_method(method, *train, settings);

    make_output_dir(cfg.output_dir);
    SavedModel saved;
    saved.method = std::string(to_string(method));
    saved.column_names = fit.result.column_names;
    saved.model = fit.model;
    saved.response = cfg.response;
    saved.threshold = cfg.threshold;
    saved.predictors = cfg.predictors;
    saved.transforms = cfg.transforms;
    if (fit.chain) {
      saved.chain_file = "chain.csv";
      write_chain(in_dir(cfg.output_dir, "chain.csv"), *fit.chain);
    }
    write_atomic(in_dir(cfg.output_dir, "summary.csv"), format_fit_summary(fit.result));
    write_atomic(in_dir(cfg.output_dir, "model.json"), model_to_json(saved));

    std::string ars_table = "part,n11,n10,n01,n00,ars,log_ars,sigma,z,p\n";
    auto ars_row = [&](const char* part, const BinaryDataset& d) {
      const ARSResult r = ars_one_sample_test(confusion(classify(fit.model, d.X()), labels(d.y())));
      ars_table += std::string(part) + "," + format_number(r.cells.n11) + "," + format_number(r.cells.n10) + "," +
                   format_number(r.cells.n01) + "," + format_number(r.cells.n00) + "," + format_number(r.ars) + "," +
                   format_number(r.log_ars) + "," + format_number(r.sigma) + "," + format_number(r.z) + "," +
                   format_number(r.p_value) + "\n";
    };
    ars_row("train", *train);
    if (test) ars_row("test", *test);
    write_atomic(in_dir(cfg.output_dir, "ars.csv"), ars_table);
    out << format_fit_summary(fit.result);
    return kExitOk;
  });
}

int cmd_diagnose(const DiagnoseConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(cfg.model, "model");
    require_file(cfg.input, "input");
    require_output_dir(cfg.output_dir);
    const LinkFamily family = parse_link_family(cfg.family);
    check_level(cfg.level, "level");
    const auto delimiter = parse_delimiter(cfg.delimiter);
    const SavedModel saved = model_from_json(read_file(cfg.model));
    if (!saved.chain_file.empty()) {
      const fs::path chain = fs::path(cfg.model).parent_path() / saved.chain_file;
      if (!fs::is_regular_file(chain)) throw ValidationError("fit artifact missing: chain file " + chain.string());
    }
    const BinaryDataset data = build_dataset(read_numeric_table(cfg.input, delimiter),
                                             design_spec(saved.response, saved.threshold, saved.predictors,
                                                         saved.transforms));
    if (data.column_names() != saved.column_names) {
      throw ValidationError("input columns do not match the fitted model's design");
    }
    const DiagnosticReport report = alpha_star_test(alpha_star_profile(saved.model, data.X(), family), cfg.level);
    make_output_dir(cfg.output_dir);
    const std::string text = format_diagnostic_report(report, family);
    write_atomic(in_dir(cfg.output_dir, "diagnostic.csv"), text);
    out << text;
    return kExitOk;
  });
}

namespace {

ConfusionMatrix table_confusion(const NumericTable& t, const std::vector<Eigen::Index>& rows) {
  const Eigen::Index pc = t.column_index("pred");
  const Eigen::Index tc = t.column_index("truth");
  std::vector<int> pred, truth;
  for (Eigen::Index r : rows) {
    const double p = t.values(r, pc);
    const double y = t.values(r, tc);
    if ((p != 0.0 && p != 1.0) || (y != 0.0 && y != 1.0)) {
      throw ValidationError("pred and truth must be 0/1 (row " + std::to_string(r + 1) + ")");
    }
    pred.push_back(static_cast<int>(p));
    truth.push_back(static_cast<int>(y));
  }
  return confusion(pred, truth);
}

std::vector<Eigen::Index> all_rows(const NumericTable& t) {
  std::vector<Eigen::Index> r(static_cast<std::size_t>(t.values.rows()));
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) r[static_cast<std::size_t>(i)] = i;
  return r;
}

// log-ARS per replicate, either given directly or from grouped (pred, truth) rows.
std::vector<double> log_ars_sample(const NumericTable& t, double epsilon, const std::string& path) {
  if (std::find(t.header.begin(), t.header.end(), "log_ars") != t.header.end()) {
    const Eigen::Index c = t.column_index("log_ars");
    return {t.values.col(c).data(), t.values.col(c).data() + t.values.rows()};
  }
  if (std::find(t.header.begin(), t.header.end(), "replicate") == t.header.end()) {
    throw ValidationError(path + ": two-sample comparison needs a log_ars column or a replicate column");
  }
  const Eigen::Index rc = t.column_index("replicate");
  std::map<double, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) groups[t.values(i, rc)].push_back(i);
  std::vector<double> out;
  for (const auto& [id, rows] : groups) out.push_back(std::log(ars(table_confusion(t, rows), epsilon)));
  return out;
}

}  // namespace

int cmd_ars(const ArsConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.inputs.empty() || cfg.inputs.size() > 2) throw ValidationError("input: give one or two files");
    for (const auto& p : cfg.inputs) require_file(p, "input");
    require_output_dir(cfg.output_dir);
    if (!(cfg.epsilon >= 0.0)) throw ValidationError("epsilon must be >= 0");
    std::vector<NumericTable> tables;
    for (const auto& p : cfg.inputs) tables.push_back(read_numeric_table(p));

    std::string text;
    std::string name;
    if (tables.size() == 1) {
      const ARSResult r = ars_one_sample_test(table_confusion(tables[0], all_rows(tables[0])), cfg.epsilon);
      text = format_ars_report(r);
      name = "ars.csv";
    } else {
      const auto a = log_ars_sample(tables[0], cfg.epsilon, cfg.inputs[0]);
      const auto b = log_ars_sample(tables[1], cfg.epsilon, cfg.inputs[1]);
      text = format_two_sample_report(ars_two_sample_test(a, b, cfg.paired));
      name = "ars_compare.csv";
    }
    make_output_dir(cfg.output_dir);
    write_atomic(in_dir(cfg.output_dir, name), text);
    out << text;
    return kExitOk;
  });
}

int cmd_split(const SplitConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require_file(cfg.input, "input");
    require_output_dir(cfg.output_dir);
    const SplitRule rule = parse_split_rule(cfg.rule, cfg.seed);
    const auto delimiter = parse_delimiter(cfg.delimiter);
    const NumericTable table = read_numeric_table(cfg.input, delimiter);

    // Rows are copied verbatim; the numeric parse only validates them.
    std::istringstream raw(read_file(cfg.input));
    std::string header;
    std::getline(raw, header);
    std::vector<std::string> lines;
    for (std::string line; std::getline(raw, line);) {
      std::string probe = line;
      probe.erase(std::remove_if(probe.begin(), probe.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
                  probe.end());
      if (!probe.empty()) lines.push_back(line);
    }
    const SplitIndices idx = split_indices(static_cast<Eigen::Index>(lines.size()), rule);
    if (!cfg.response.empty()) {
      const Eigen::Index yc = table.column_index(cfg.response);
      auto check = [&](const std::vector<Eigen::Index>& rows, const char* part) {
        int ones = 0;
        for (auto r : rows) {
          const double v = table.values(r, yc);
          ones += cfg.threshold ? (v > *cfg.threshold) : (v == 1.0);
        }
        if (ones == 0 || ones == static_cast<int>(rows.size())) {
          throw ValidationError(std::string(part) + " part contains a single class");
        }
      };
      check(idx.train, "train");
      check(idx.test, "test");
    }
    auto emit = [&](const std::vector<Eigen::Index>& rows) {
      std::string s = header + "\n";
      for (auto r : rows) s += lines[static_cast<std::size_t>(r)] + "\n";
      return s;
    };
    make_output_dir(cfg.output_dir);
    write_atomic(in_dir(cfg.output_dir, "train.csv"), emit(idx.train));
    write_atomic(in_dir(cfg.output_dir, "test.csv"), emit(idx.test));
    out << "train " << idx.train.size() << " rows, test " << idx.test.size() << " rows\n";
    return kExitOk;
  });
}

namespace {
bool names_option(const std::string& arg, const std::string& flag) {
  return arg == flag || arg.rfind(flag + "=", 0) == 0;
}

// Rewrites `<sub> ... --config FILE ...` so the file's keys come first as
// ordinary options; keys also given on the command line are dropped so the
// command line wins.
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  CLI::App* sub = nullptr;
  for (CLI::App* candidate : app.get_subcommands([](CLI::App*) { return true; })) {
    if (candidate->get_name() == args[0]) sub = candidate;
  }
  if (sub == nullptr) return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  std::vector<std::string> out{args[0]};
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw ValidationError("config " + path + ": sections are not supported");
    const std::string flag = "--" + item.name;
    if (item.name == "config" || sub->get_option_no_throw(flag) == nullptr) {
      throw ValidationError("config " + path + ": unknown key '" + item.name + "'");
    }
    if (std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) { return names_option(a, flag); })) {
      continue;
    }
    for (const std::string& v : item.inputs) out.push_back(flag + "=" + v);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary regression with a nonparametric latent link: simulation, fitting, diagnostics and ARS"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "read options from a flat key = value file");
  };

  SimulateConfig sim;
  auto* s = app.add_subcommand("simulate", "run a simulation grid and write a coverage/ARS report");
  add_common(s);
  s->add_option("--dgps", sim.dgps, "data generating links")->delimiter(',');
  s->add_option("--forms", sim.forms, "model forms (linear, mixed, nonlinear)")->delimiter(',');
  s->add_option("--sizes", sim.sizes, "sample sizes")->delimiter(',');
  s->add_option("--balances", sim.balances, "target success proportions in (0, 0.5]")->delimiter(',');
  s->add_option("--methods", sim.methods, "fitting methods")->delimiter(',');
  s->add_option("--slopes", sim.slopes, "true non-intercept coefficients")->delimiter(',');
  s->add_flag("--nuisance", sim.nuisance, "append a standard-normal column with coefficient 0");
  s->add_option("--replications", sim.replications, "datasets per cell");
  s->add_option("--seed", sim.seed, "master seed");
  s->add_option("--iters", sim.iters, "MCMC iterations");
  s->add_option("--burnin", sim.burnin, "MCMC burn-in");
  s->add_option("--bootstrap", sim.bootstrap, "bootstrap resamples for pen-logit");
  s->add_option("--level", sim.level, "interval level");
  s->add_option("--kappa", sim.kappa, "'observed' or a fixed value in (0,1)");
  s->add_option("--reference", sim.reference, "link the latent CDF is held against");
  s->add_option("--threads", sim.threads, "worker threads over cells");
  s->add_option("--chains", sim.chains, "write replication-0 chains (true/false)");
  s->add_option("--output-dir", sim.output_dir, "output directory")->required();

  FitConfig fit;
  double fit_threshold = 0.0;
  auto* f = app.add_subcommand("fit", "fit one method to a delimited data file");
  add_common(f);
  f->add_option("--input", fit.input, "delimited data file with a header row")->required();
  f->add_option("--response", fit.response, "response column")->required();
  auto* fit_thr = f->add_option("--threshold", fit_threshold, "response > threshold maps to 1");
  f->add_option("--predictors", fit.predictors, "predictor columns (default: all others)")->delimiter(',');
  f->add_option("--transforms", fit.transforms, "column transforms, e.g. x2:exp")->delimiter(',');
  f->add_option("--method", fit.method, "mle-logit, pen-logit, albert-chib, laheml or laheml-pen");
  f->add_option("--reference", fit.reference, "link the latent CDF is held against");
  f->add_option("--kappa", fit.kappa, "'observed' or a fixed value in (0,1)");
  f->add_option("--iters", fit.iters, "MCMC iterations");
  f->add_option("--burnin", fit.burnin, "MCMC burn-in");
  f->add_option("--bootstrap", fit.bootstrap, "bootstrap resamples for pen-logit");
  f->add_option("--seed", fit.seed, "seed");
  f->add_option("--level", fit.level, "interval level");
  f->add_option("--split", fit.split, "held-out rule: fraction:<f> or tail:<m>");
  f->add_option("--delimiter", fit.delimiter, "auto, comma or tab");
  f->add_option("--output-dir", fit.output_dir, "output directory")->required();

  DiagnoseConfig diag;
  auto* d = app.add_subcommand("diagnose", "test a parametric link against a fitted model");
  add_common(d);
  d->add_option("--model", diag.model, "model.json written by fit")->required();
  d->add_option("--input", diag.input, "data file")->required();
  d->add_option("--family", diag.family, "candidate link");
  d->add_option("--level", diag.level, "significance level");
  d->add_option("--delimiter", diag.delimiter, "auto, comma or tab");
  d->add_option("--output-dir", diag.output_dir, "output directory")->required();

  ArsConfig arscfg;
  auto* a = app.add_subcommand("ars", "one-sample ARS test or two-sample log-ARS comparison");
  add_common(a);
  a->add_option("--input", arscfg.inputs, "one or two files")->required()->delimiter(',');
  a->add_flag("--paired", arscfg.paired, "paired comparison");
  a->add_option("--epsilon", arscfg.epsilon, "zero-cell correction");
  a->add_option("--output-dir", arscfg.output_dir, "output directory")->required();

  SplitConfig split;
  double split_threshold = 0.0;
  auto* sp = app.add_subcommand("split", "split a data file into train and test parts");
  add_common(sp);
  sp->add_option("--input", split.input, "data file")->required();
  sp->add_option("--rule", split.rule, "fraction:<f> or tail:<m>")->required();
  sp->add_option("--seed", split.seed, "seed for fraction splits");
  sp->add_option("--response", split.response, "response column checked for both classes");
  auto* sp_thr = sp->add_option("--threshold", split_threshold, "response > threshold maps to 1");
  sp->add_option("--delimiter", split.delimiter, "auto, comma or tab");
  sp->add_option("--output-dir", split.output_dir, "output directory")->required();

  try {
    const std::vector<std::string> expanded = expand_config(app, args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  if (fit_thr->count() > 0) fit.threshold = fit_threshold;
  if (sp_thr->count() > 0) split.threshold = split_threshold;

  if (s->parsed()) return cmd_simulate(sim, out, err);
  if (f->parsed()) return cmd_fit(fit, out, err);
  if (d->parsed()) return cmd_diagnose(diag, out, err);
  if (a->parsed()) return cmd_ars(arscfg, out, err);
  return cmd_split(split, out, err);
}

}  // namespace npglm
