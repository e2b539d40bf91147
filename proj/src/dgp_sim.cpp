#include "npglm/dgp_sim.hpp"

#include "npglm/ars.hpp"
#include "npglm/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <thread>
#include <tuple>

namespace npglm {

void SimCell::validate() const {
  if (!(balance > 0.0 && balance <= 0.5)) {
    throw ValidationError("balance must be in (0, 0.5], got " + std::to_string(balance));
  }
  if (n < 100) throw ValidationError("n must be >= 100, got " + std::to_string(n));
  if (slopes.size() != form.transforms.size()) {
    throw ValidationError("slopes: expected " + std::to_string(form.transforms.size()) +
                          " values for the model form, got " + std::to_string(slopes.size()));
  }
}

double calibrate_intercept(const Vector& offset, LinkFamily family, double target) {
  if (!(target > 0.0 && target < 1.0)) throw ValidationError("calibration target must be in (0,1)");
  auto share = [&](double b) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < offset.size(); ++i) s += inverse_link(family, b + offset(i));
    return s / static_cast<double>(offset.size());
  };
  double lo = -1.0;
  double hi = 1.0;
  while (share(lo) > target) {
    lo *= 2.0;
    if (lo < -1e6) throw NumericalError("intercept calibration failed to bracket the target");
  }
  while (share(hi) < target) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError("intercept calibration failed to bracket the target");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (share(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

Matrix draw_design(const SimCell& cell, int n, Rng& rng) {
  const auto k = static_cast<Eigen::Index>(cell.form.transforms.size());
  Matrix raw(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) raw(i, j) = standard_normal(rng);
  }
  Matrix X = apply_model_form(raw, cell.form);
  if (cell.nuisance) {
    X.conservativeResize(Eigen::NoChange, X.cols() + 1);
    for (Eigen::Index i = 0; i < n; ++i) X(i, X.cols() - 1) = standard_normal(rng);
  }
  return X;
}

std::vector<std::string> design_names(const SimCell& cell) {
  std::vector<std::string> names{"intercept"};
  for (std::size_t j = 0; j < cell.form.transforms.size(); ++j) names.push_back("x" + std::to_string(j + 1));
  if (cell.nuisance) names.emplace_back("nuisance");
  return names;
}

Vector draw_responses(const Matrix& X, const Vector& beta, LinkFamily family, Rng& rng) {
  const Vector eta = linear_predictor(X, beta);
  Vector y(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) y(i) = uniform_open(rng) < inverse_link(family, eta(i)) ? 1.0 : 0.0;
  return y;
}

}  // namespace

SimData generate_dataset(const SimCell& cell) {
  cell.validate();
  Rng rng(cell.seed);
  const Matrix X = draw_design(cell, cell.n, rng);
  Vector beta = Vector::Zero(X.cols());
  for (std::size_t j = 0; j < cell.slopes.size(); ++j) beta(static_cast<Eigen::Index>(j) + 1) = cell.slopes[j];
  const Vector offset = X * beta;
  beta(0) = calibrate_intercept(offset, cell.dgp, cell.balance);
  Vector y = draw_responses(X, beta, cell.dgp, rng);
  return {BinaryDataset(X, std::move(y), design_names(cell)), beta};
}

BinaryDataset sample_dataset(const SimCell& cell, const Vector& beta, int n, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix X = draw_design(cell, n, rng);
  if (X.cols() != beta.size()) throw ValidationError("sample_dataset: coefficient length mismatch");
  Vector y = draw_responses(X, beta, cell.dgp, rng);
  return {X, std::move(y), design_names(cell)};
}

double coverage_flag(const Vector& ci_low, const Vector& ci_high, const Vector& truth) {
  if (ci_low.size() != truth.size() || ci_high.size() != truth.size() || truth.size() == 0) {
    throw ValidationError("coverage_flag: interval and truth lengths must match and be nonzero");
  }
  int hit = 0;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    if (ci_low(j) <= truth(j) && truth(j) <= ci_high(j)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

void GridSpec::validate() const {
  if (dgps.empty() || forms.empty() || sizes.empty() || balances.empty() || methods.empty()) {
    throw ValidationError("grid: every axis needs at least one value");
  }
  if (replications < 1) throw ValidationError("replications must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  settings.mcmc.validate();
  for (const SimCell& c : cells()) c.validate();
}

std::vector<SimCell> GridSpec::cells() const {
  std::vector<SimCell> out;
  std::uint64_t index = 0;
  for (LinkFamily d : dgps) {
    for (const ModelForm& f : forms) {
      for (int n : sizes) {
        for (double b : balances) {
          SimCell c;
          c.dgp = d;
          c.form = f;
          c.n = n;
          c.balance = b;
          c.slopes = slopes;
          c.nuisance = nuisance;
          c.seed = derive_seed(master_seed, index++);
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

bool SimReport::all_succeeded() const {
  return std::all_of(rows.begin(), rows.end(), [](const SimRow& r) { return r.failures.empty(); });
}

namespace {

constexpr std::uint64_t kTestStream = 0x7e57;
constexpr std::uint64_t kMethodStream = 0x100;

double classification_ars(const ProbabilityModel& model, const BinaryDataset& data) {
  const std::vector<int> pred = classify(model, data.X());
  std::vector<int> truth(static_cast<std::size_t>(data.n()));
  for (Eigen::Index i = 0; i < data.n(); ++i) truth[static_cast<std::size_t>(i)] = static_cast<int>(data.y()(i));
  return ars(confusion(pred, truth));
}

std::string chain_file_name(const SimCell& cell, Method m) {
  char balance[32];
  std::snprintf(balance, sizeof balance, "%g", cell.balance);
  return std::string(to_string(cell.dgp)) + "_" + std::string(to_string(cell.form.tag)) + "_n" +
         std::to_string(cell.n) + "_b" + balance + "_" + std::string(to_string(m)) + ".csv";
}

std::vector<SimRow> run_cell(const GridSpec& spec, const SimCell& cell) {
  std::vector<SimRow> rows(spec.methods.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].dgp = cell.dgp;
    rows[k].form = cell.form.tag;
    rows[k].n = cell.n;
    rows[k].balance = cell.balance;
    rows[k].method = spec.methods[k];
  }
  for (int rep = 0; rep < spec.replications; ++rep) {
    SimCell rc = cell;
    rc.seed = derive_seed(cell.seed, static_cast<std::uint64_t>(rep));
    std::optional<SimData> sim;
    std::optional<BinaryDataset> test;
    try {
      sim = generate_dataset(rc);
      test = sample_dataset(rc, sim->true_beta, rc.n, derive_seed(rc.seed, kTestStream));
    } catch (const std::exception& e) {
      for (auto& row : rows) row.failures.push_back("replication " + std::to_string(rep) + ": " + e.what());
      continue;
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
      SimRow& row = rows[k];
      MethodSettings settings = spec.settings;
      settings.mcmc.seed = derive_seed(rc.seed, kMethodStream + static_cast<std::uint64_t>(row.method));
      try {
        MethodFit fit = fit_method(row.method, sim->data, settings);
        const FitResult& r = fit.result;
        row.coverage_reps.push_back(coverage_flag(r.ci_low, r.ci_high, sim->true_beta));
        row.ars_train_reps.push_back(classification_ars(fit.model, sim->data));
        row.ars_test_reps.push_back(classification_ars(fit.model, *test));
        row.ci_width += (r.ci_high - r.ci_low).mean();
        if (rep == 0 && !spec.chain_dir.empty() && fit.chain) {
          write_chain((std::filesystem::path(spec.chain_dir) / chain_file_name(cell, row.method)).string(),
                      *fit.chain);
        }
      } catch (const std::exception& e) {
        row.failures.push_back("replication " + std::to_string(rep) + ": " + e.what());
      }
    }
  }
  for (SimRow& row : rows) {
    row.replications = static_cast<int>(row.coverage_reps.size());
    if (row.replications > 0) {
      row.coverage = mean(row.coverage_reps);
      row.ars_train = mean(row.ars_train_reps);
      row.ars_test = mean(row.ars_test_reps);
      row.ci_width /= row.replications;
    }
  }
  return rows;
}

}  // namespace

SimReport run_grid(const GridSpec& spec) {
  spec.validate();
  const std::vector<SimCell> cells = spec.cells();
  std::vector<std::vector<SimRow>> per_cell(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) per_cell[i] = run_cell(spec, cells[i]);
  };
  const int threads = std::min<int>(spec.threads, static_cast<int>(cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  SimReport report;
  for (auto& rows : per_cell) {
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const SimRow& a, const SimRow& b) {
    return std::tie(a.dgp, a.form, a.n, a.balance, a.method) < std::tie(b.dgp, b.form, b.n, b.balance, b.method);
  });
  return report;
}

}  // namespace npglm
