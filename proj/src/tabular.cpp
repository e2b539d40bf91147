#include "npglm/tabular.hpp"

#include "npglm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace npglm {

ColumnTransformSpec parse_transform_spec(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ValidationError("transform '" + text + "' must look like column:exp");
  }
  return {text.substr(0, colon), parse_column_transform(text.substr(colon + 1))};
}

BinaryDataset build_dataset(const NumericTable& table, const DesignSpec& spec) {
  if (spec.response.empty()) throw ValidationError("response column not set");
  const Eigen::Index ycol = table.column_index(spec.response);
  std::vector<std::string> predictors = spec.predictors;
  if (predictors.empty()) {
    for (const auto& h : table.header) {
      if (h != spec.response) predictors.push_back(h);
    }
  }
  if (predictors.empty()) throw ValidationError("no predictor columns");
  for (const auto& t : spec.transforms) {
    if (std::find(predictors.begin(), predictors.end(), t.column) == predictors.end()) {
      throw ValidationError("transform refers to '" + t.column + "', which is not a predictor");
    }
  }
  const Eigen::Index n = table.values.rows();
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = table.values(i, ycol);
    if (spec.threshold) {
      y(i) = v > *spec.threshold ? 1.0 : 0.0;
    } else if (v == 0.0 || v == 1.0) {
      y(i) = v;
    } else {
      throw ValidationError("response '" + spec.response + "' row " + std::to_string(i + 1) +
                            " is not 0/1; set a threshold");
    }
  }
  const double s = y.sum();
  if (s == 0.0 || s == static_cast<double>(n)) {
    throw ValidationError("response '" + spec.response + "' is constant (all " + (s == 0.0 ? "0" : "1") + ")");
  }
  Matrix raw(n, static_cast<Eigen::Index>(predictors.size()));
  std::vector<ColumnTransform> transforms(predictors.size(), ColumnTransform::Identity);
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    if (predictors[j] == spec.response) throw ValidationError("response cannot also be a predictor");
    raw.col(static_cast<Eigen::Index>(j)) = table.values.col(table.column_index(predictors[j]));
    for (const auto& t : spec.transforms) {
      if (t.column == predictors[j]) transforms[j] = t.transform;
    }
  }
  return make_dataset(raw, y, ModelForm::custom(std::move(transforms)), predictors);
}

SplitRule parse_split_rule(const std::string& text, std::uint64_t seed) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "fraction") {
      const double f = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      if (!(f > 0.0 && f < 1.0)) throw ValidationError("split fraction must be in (0,1)");
      return SplitFraction{f, seed};
    }
    if (kind == "tail") {
      const long long m = std::stoll(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      if (m < 1) throw ValidationError("split tail count must be >= 1");
      return SplitTail{static_cast<Eigen::Index>(m)};
    }
  } catch (const std::logic_error&) {
    throw ValidationError("split rule '" + text + "' has a malformed argument");
  }
  throw ValidationError("split rule '" + text + "' must be fraction:<f> or tail:<m>");
}

SplitIndices split_indices(Eigen::Index n, const SplitRule& rule) {
  SplitIndices out;
  std::vector<char> is_test(static_cast<std::size_t>(n), 0);
  if (const auto* f = std::get_if<SplitFraction>(&rule)) {
    if (!(f->fraction > 0.0 && f->fraction < 1.0)) throw ValidationError("split fraction must be in (0,1)");
    const auto m = static_cast<Eigen::Index>(std::llround(f->fraction * static_cast<double>(n)));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(f->seed);
    // Partial Fisher–Yates over the first m slots.
    for (Eigen::Index i = 0; i < m; ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
      is_test[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    }
  } else {
    const Eigen::Index m = std::get<SplitTail>(rule).count;
    if (m < 1 || m > n) throw ValidationError("split tail count must be in [1, n]");
    for (Eigen::Index i = n - m; i < n; ++i) is_test[static_cast<std::size_t>(i)] = 1;
  }
  for (Eigen::Index i = 0; i < n; ++i) (is_test[static_cast<std::size_t>(i)] ? out.test : out.train).push_back(i);
  if (out.train.empty() || out.test.empty()) throw ValidationError("split leaves an empty part");
  return out;
}

std::pair<BinaryDataset, BinaryDataset> split_train_test(const BinaryDataset& data, const SplitRule& rule) {
  const SplitIndices idx = split_indices(data.n(), rule);
  auto check = [&](const std::vector<Eigen::Index>& rows, const char* part) {
    double s = 0.0;
    for (auto r : rows) s += data.y()(r);
    if (s == 0.0 || s == static_cast<double>(rows.size())) {
      throw ValidationError(std::string(part) + " part contains a single class");
    }
  };
  check(idx.train, "train");
  check(idx.test, "test");
  return {data.subset(idx.train), data.subset(idx.test)};
}

}  // namespace npglm
