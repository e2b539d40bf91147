#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace npglm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Raised for malformed inputs (bad dimensions, out-of-range options, invalid
// data). The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical procedure cannot continue (separation, singular
// information, non-finite sampler state). The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Probabilities are kept inside [kProbFloor, 1 - kProbFloor] after every
// inverse link so downstream logs stay finite.
inline constexpr double kProbFloor = 1e-12;

double clamp_probability(double p, double floor = kProbFloor);

enum class LinkFamily { Logit, Probit, CLogLog };

std::string_view to_string(LinkFamily family);
LinkFamily parse_link_family(std::string_view name);

// Inverse link, i.e. P(y = 1 | eta), clamped to the probability band.
double inverse_link(LinkFamily family, double eta);

// Moments of the distribution whose CDF is the family's inverse link. Used to
// compare links on a common (mean 0, unit variance) latent scale.
double link_latent_mean(LinkFamily family);
double link_latent_sd(LinkFamily family);

// Inverse link evaluated at an index expressed in unit-variance latent units:
// F(mean + sd * z).
double standardized_inverse_link(LinkFamily family, double z);

enum class ColumnTransform { Identity, Exp, Sin };

std::string_view to_string(ColumnTransform t);
ColumnTransform parse_column_transform(std::string_view name);

enum class ModelFormTag { Linear, Mixed, Nonlinear, Custom };

struct ModelForm {
  ModelFormTag tag = ModelFormTag::Linear;
  std::vector<ColumnTransform> transforms;

  // Paper grid forms on two covariates.
  static ModelForm linear(std::size_t k = 2);
  static ModelForm mixed();
  static ModelForm nonlinear();
  static ModelForm custom(std::vector<ColumnTransform> transforms);
};

std::string_view to_string(ModelFormTag tag);
ModelForm parse_model_form(std::string_view name);

// (y, X) with X carrying the intercept in column 0.
class BinaryDataset {
 public:
  BinaryDataset(Matrix X, Vector y, std::vector<std::string> column_names);

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  const std::vector<std::string>& column_names() const { return names_; }
  Eigen::Index n() const { return X_.rows(); }
  Eigen::Index n_coef() const { return X_.cols(); }
  double success_share() const { return y_.mean(); }

  BinaryDataset subset(const std::vector<Eigen::Index>& rows) const;

 private:
  Matrix X_;
  Vector y_;
  std::vector<std::string> names_;
};

// Builds a BinaryDataset from raw covariates by applying the form's column
// transforms and prepending the intercept.
BinaryDataset make_dataset(const Matrix& raw, const Vector& y, const ModelForm& form,
                           std::vector<std::string> raw_names = {});

struct FitResult {
  std::string method_tag;
  std::vector<std::string> column_names;
  Vector beta_mean;
  Vector ci_low;
  Vector ci_high;
  std::string draws_path;
  int n_iters = 0;
  int n_burnin = 0;
};

// eta_i = sum_j X_ij beta_j.
Vector linear_predictor(const Matrix& X, const Vector& beta);

// n x k raw covariates -> n x (k+1) design with intercept in column 0.
Matrix apply_model_form(const Matrix& raw, const ModelForm& form);

}  // namespace npglm
