#pragma once

#include "npglm/ars.hpp"
#include "npglm/baselines.hpp"
#include "npglm/diagnostics.hpp"
#include "npglm/dgp_sim.hpp"
#include "npglm/predictive.hpp"

#include <optional>
#include <string>
#include <vector>

namespace npglm {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Round-trip precision for doubles.
std::string format_number(double v);

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

struct NumericTable {
  std::vector<std::string> header;
  Matrix values;

  Eigen::Index column_index(const std::string& name) const;  // throws ValidationError when absent
};

// Header row required; delimiter auto-detected among comma and tab unless given.
NumericTable read_numeric_table(const std::string& path, std::optional<char> delimiter = std::nullopt);
std::string format_table(const std::vector<std::string>& header, const Matrix& values, char delimiter = ',');

void write_chain(const std::string& path, const Chain& chain);
Chain read_chain(const std::string& path);

std::string format_fit_summary(const FitResult& fit);
std::string format_sim_report(const SimReport& report);
std::string format_diagnostic_report(const DiagnosticReport& report, LinkFamily family);
std::string format_ars_report(const ARSResult& result);
std::string format_two_sample_report(const TwoSampleResult& result);

// Fitted model plus the context needed to reuse it.
struct SavedModel {
  std::string method;
  std::vector<std::string> column_names;
  ProbabilityModel model;
  std::string chain_file;  // relative to the model file's directory; may be empty
  // How the design was built from the input table.
  std::string response;
  std::optional<double> threshold;
  std::vector<std::string> predictors;
  std::vector<std::string> transforms;  // "col:exp" form
};

std::string model_to_json(const SavedModel& m);
SavedModel model_from_json(const std::string& text);

}  // namespace npglm
