#include "npglm/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace npglm {

double clamp_probability(double p, double floor) {
  return std::clamp(p, floor, 1.0 - floor);
}

std::string_view to_string(LinkFamily family) {
  switch (family) {
    case LinkFamily::Logit: return "logit";
    case LinkFamily::Probit: return "probit";
    case LinkFamily::CLogLog: return "cloglog";
  }
  return "?";
}

LinkFamily parse_link_family(std::string_view name) {
  if (name == "logit") return LinkFamily::Logit;
  if (name == "probit") return LinkFamily::Probit;
  if (name == "cloglog") return LinkFamily::CLogLog;
  throw ValidationError("unknown link family '" + std::string(name) +
                        "' (expected logit, probit or cloglog)");
}

double inverse_link(LinkFamily family, double eta) {
  if (std::isnan(eta)) throw ValidationError("inverse_link: linear predictor is NaN");
  double p = 0.5;
  switch (family) {
    case LinkFamily::Logit:
      p = eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
      break;
    case LinkFamily::Probit:
      p = 0.5 * std::erfc(-eta / std::numbers::sqrt2);
      break;
    case LinkFamily::CLogLog:
      p = -std::expm1(-std::exp(eta));
      break;
  }
  if (std::isnan(p)) p = eta > 0 ? 1.0 : 0.0;
  return clamp_probability(p);
}

double link_latent_mean(LinkFamily family) {
  // The cloglog inverse link is the CDF of the minimum extreme-value law.
  return family == LinkFamily::CLogLog ? -std::numbers::egamma : 0.0;
}

double link_latent_sd(LinkFamily family) {
  switch (family) {
    case LinkFamily::Logit: return std::numbers::pi / std::numbers::sqrt3;
    case LinkFamily::Probit: return 1.0;
    case LinkFamily::CLogLog: return std::numbers::pi / std::sqrt(6.0);
  }
  return 1.0;
}

double standardized_inverse_link(LinkFamily family, double z) {
  return inverse_link(family, link_latent_mean(family) + link_latent_sd(family) * z);
}

std::string_view to_string(ColumnTransform t) {
  switch (t) {
    case ColumnTransform::Identity: return "identity";
    case ColumnTransform::Exp: return "exp";
    case ColumnTransform::Sin: return "sin";
  }
  return "?";
}

ColumnTransform parse_column_transform(std::string_view name) {
  if (name == "identity") return ColumnTransform::Identity;
  if (name == "exp") return ColumnTransform::Exp;
  if (name == "sin") return ColumnTransform::Sin;
  throw ValidationError("unknown column transform '" + std::string(name) +
                        "' (expected identity, exp or sin)");
}

ModelForm ModelForm::linear(std::size_t k) {
  return {ModelFormTag::Linear, std::vector<ColumnTransform>(k, ColumnTransform::Identity)};
}

ModelForm ModelForm::mixed() {
  return {ModelFormTag::Mixed, {ColumnTransform::Identity, ColumnTransform::Exp}};
}

ModelForm ModelForm::nonlinear() {
  return {ModelFormTag::Nonlinear, {ColumnTransform::Exp, ColumnTransform::Sin}};
}

ModelForm ModelForm::custom(std::vector<ColumnTransform> transforms) {
  return {ModelFormTag::Custom, std::move(transforms)};
}

std::string_view to_string(ModelFormTag tag) {
  switch (tag) {
    case ModelFormTag::Linear: return "linear";
    case ModelFormTag::Mixed: return "mixed";
    case ModelFormTag::Nonlinear: return "nonlinear";
    case ModelFormTag::Custom: return "custom";
  }
  return "?";
}

ModelForm parse_model_form(std::string_view name) {
  if (name == "linear") return ModelForm::linear();
  if (name == "mixed") return ModelForm::mixed();
  if (name == "nonlinear") return ModelForm::nonlinear();
  throw ValidationError("unknown model form '" + std::string(name) +
                        "' (expected linear, mixed or nonlinear)");
}

BinaryDataset::BinaryDataset(Matrix X, Vector y, std::vector<std::string> column_names)
    : X_(std::move(X)), y_(std::move(y)), names_(std::move(column_names)) {
  const auto n = X_.rows();
  const auto p = X_.cols();
  if (p < 1) throw ValidationError("design matrix has no columns");
  if (y_.size() != n) {
    std::ostringstream msg;
    msg << "response length " << y_.size() << " does not match design rows " << n;
    throw ValidationError(msg.str());
  }
  if (n < p + 1) {
    std::ostringstream msg;
    msg << "need at least k+2 = " << p + 1 << " observations, got " << n;
    throw ValidationError(msg.str());
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (X_(i, 0) != 1.0) {
      throw ValidationError("design column 0 must be the intercept (row " +
                            std::to_string(i) + " is not 1)");
    }
    if (y_(i) != 0.0 && y_(i) != 1.0) {
      throw ValidationError("response must be 0/1 (row " + std::to_string(i) + ")");
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!std::isfinite(X_(i, j))) {
        throw ValidationError("non-finite design entry at row " + std::to_string(i) +
                              ", column " + std::to_string(j));
      }
    }
  }
  if (names_.empty()) {
    names_.push_back("intercept");
    for (Eigen::Index j = 1; j < p; ++j) names_.push_back("x" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(names_.size()) != p) {
    throw ValidationError("column name count does not match design columns");
  }
}

BinaryDataset BinaryDataset::subset(const std::vector<Eigen::Index>& rows) const {
  Matrix X(static_cast<Eigen::Index>(rows.size()), X_.cols());
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = rows[r];
    if (i < 0 || i >= n()) throw ValidationError("subset row index out of range");
    X.row(static_cast<Eigen::Index>(r)) = X_.row(i);
    y(static_cast<Eigen::Index>(r)) = y_(i);
  }
  return {std::move(X), std::move(y), names_};
}

BinaryDataset make_dataset(const Matrix& raw, const Vector& y, const ModelForm& form,
                           std::vector<std::string> raw_names) {
  std::vector<std::string> names{"intercept"};
  if (raw_names.empty()) {
    for (Eigen::Index j = 0; j < raw.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  } else {
    if (static_cast<Eigen::Index>(raw_names.size()) != raw.cols()) {
      throw ValidationError("raw column name count does not match raw columns");
    }
    names.insert(names.end(), raw_names.begin(), raw_names.end());
  }
  return {apply_model_form(raw, form), y, std::move(names)};
}

Vector linear_predictor(const Matrix& X, const Vector& beta) {
  if (X.cols() != beta.size()) {
    std::ostringstream msg;
    msg << "linear_predictor: design has " << X.cols() << " columns but beta has "
        << beta.size() << " entries";
    throw ValidationError(msg.str());
  }
  return X * beta;
}

Matrix apply_model_form(const Matrix& raw, const ModelForm& form) {
  if (static_cast<Eigen::Index>(form.transforms.size()) != raw.cols()) {
    std::ostringstream msg;
    msg << "model form has " << form.transforms.size() << " transforms for " << raw.cols()
        << " raw columns";
    throw ValidationError(msg.str());
  }
  Matrix X(raw.rows(), raw.cols() + 1);
  X.col(0).setOnes();
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const auto t = form.transforms[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      const double v = raw(i, j);
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite raw value at row " + std::to_string(i) +
                              ", column " + std::to_string(j));
      }
      double out = v;
      switch (t) {
        case ColumnTransform::Identity: break;
        case ColumnTransform::Exp: out = std::exp(v); break;
        case ColumnTransform::Sin: out = std::sin(v); break;
      }
      if (!std::isfinite(out)) {
        throw ValidationError("transform " + std::string(to_string(t)) +
                              " overflowed at row " + std::to_string(i) + ", column " +
                              std::to_string(j));
      }
      X(i, j + 1) = out;
    }
  }
  return X;
}

}  // namespace npglm
