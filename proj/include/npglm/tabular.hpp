#pragma once

#include "npglm/core_model.hpp"
#include "npglm/io.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace npglm {

struct ColumnTransformSpec {
  std::string column;
  ColumnTransform transform = ColumnTransform::Identity;
};

// "col:exp", "col:sin" or "col:identity".
ColumnTransformSpec parse_transform_spec(const std::string& text);

struct DesignSpec {
  std::string response;
  // y = 1 when the response value exceeds the cutoff; otherwise the response
  // must already be 0/1.
  std::optional<double> threshold;
  // Empty means every column other than the response, in file order.
  std::vector<std::string> predictors;
  std::vector<ColumnTransformSpec> transforms;
};

BinaryDataset build_dataset(const NumericTable& table, const DesignSpec& spec);

struct SplitFraction {
  double fraction = 0.2;
  std::uint64_t seed = 1;
};
struct SplitTail {
  Eigen::Index count = 1;
};
using SplitRule = std::variant<SplitFraction, SplitTail>;

// "fraction:0.2" or "tail:500".
SplitRule parse_split_rule(const std::string& text, std::uint64_t seed);

struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

// Row indices of each part, each in original order.
SplitIndices split_indices(Eigen::Index n, const SplitRule& rule);

// Errors when either part lacks one of the classes.
std::pair<BinaryDataset, BinaryDataset> split_train_test(const BinaryDataset& data, const SplitRule& rule);

}  // namespace npglm
