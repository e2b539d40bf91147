#include "npglm/core_model.hpp"
#include "npglm/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace npglm;

TEST_CASE("linear_predictor") {
  Matrix X = Matrix::Identity(2, 2);
  Vector b(2);
  b << 1.0, 0.0;
  CHECK(linear_predictor(X, b).isApprox(X.col(0)));
  CHECK(linear_predictor(X, Vector::Zero(2)).isZero());

  Matrix row(1, 3);
  row << 1.0, 2.0, -1.0;
  Vector beta(3);
  beta << 0.5, 1.0, 2.0;
  CHECK(linear_predictor(row, beta)(0) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(linear_predictor(row, Vector::Zero(2)), ValidationError);
}

TEST_CASE("linear_predictor is linear") {
  Rng rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    Matrix X(6, 3);
    Vector b1(3), b2(3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = standard_normal(rng);
    for (int j = 0; j < 3; ++j) {
      b1(j) = standard_normal(rng);
      b2(j) = standard_normal(rng);
    }
    const double a = standard_normal(rng), c = standard_normal(rng);
    const Vector lhs = linear_predictor(X, a * b1 + c * b2);
    const Vector rhs = a * linear_predictor(X, b1) + c * linear_predictor(X, b2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("inverse_link values") {
  CHECK(inverse_link(LinkFamily::Logit, 0.0) == 0.5);
  CHECK(inverse_link(LinkFamily::Probit, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(inverse_link(LinkFamily::CLogLog, 0.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(inverse_link(LinkFamily::CLogLog, 0.0) == doctest::Approx(0.632121).epsilon(1e-6));
  for (LinkFamily f : {LinkFamily::Logit, LinkFamily::Probit, LinkFamily::CLogLog}) {
    CHECK(inverse_link(f, 1e6) < 1.0);
    CHECK(inverse_link(f, -1e6) > 0.0);
  }
}

TEST_CASE("inverse_link is strictly increasing and symmetric where it should be") {
  Rng rng(11);
  for (LinkFamily f : {LinkFamily::Logit, LinkFamily::Probit, LinkFamily::CLogLog}) {
    for (int rep = 0; rep < 300; ++rep) {
      // Below the range where CLogLog saturates to the clamp band.
      const double a = -4.0 + 6.0 * uniform_open(rng);
      const double gap = 0.01 + uniform_open(rng);
      CHECK(inverse_link(f, a) < inverse_link(f, a + gap));
      if (f != LinkFamily::CLogLog) {
        CHECK(std::abs(inverse_link(f, a) + inverse_link(f, -a) - 1.0) < 1e-12);
      }
    }
  }
  CHECK(std::abs(inverse_link(LinkFamily::CLogLog, 0.7) + inverse_link(LinkFamily::CLogLog, -0.7) - 1.0) > 0.05);
}

TEST_CASE("latent moments of the link families") {
  CHECK(link_latent_mean(LinkFamily::Logit) == 0.0);
  CHECK(link_latent_sd(LinkFamily::Logit) == doctest::Approx(std::numbers::pi / std::sqrt(3.0)));
  CHECK(link_latent_sd(LinkFamily::Probit) == 1.0);
  CHECK(link_latent_mean(LinkFamily::CLogLog) == doctest::Approx(-std::numbers::egamma));
  CHECK(link_latent_sd(LinkFamily::CLogLog) == doctest::Approx(std::numbers::pi / std::sqrt(6.0)));
}

TEST_CASE("apply_model_form") {
  Matrix raw(1, 2);
  raw << 0.3, -0.2;
  Matrix d = apply_model_form(raw, ModelForm::linear());
  CHECK(d(0, 0) == 1.0);
  CHECK(d(0, 1) == 0.3);
  CHECK(d(0, 2) == -0.2);

  raw << 0.0, 1.0;
  d = apply_model_form(raw, ModelForm::mixed());
  CHECK(d(0, 1) == 0.0);
  CHECK(d(0, 2) == doctest::Approx(2.718282).epsilon(1e-6));

  raw << 0.0, std::numbers::pi / 2.0;
  d = apply_model_form(raw, ModelForm::nonlinear());
  CHECK(d(0, 1) == 1.0);
  CHECK(d(0, 2) == doctest::Approx(1.0).epsilon(1e-15));

  raw << 1.0, 800.0;
  try {
    apply_model_form(raw, ModelForm::mixed());
    FAIL("expected overflow error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }

  CHECK_THROWS_AS(apply_model_form(Matrix::Zero(2, 3), ModelForm::mixed()), ValidationError);
}

TEST_CASE("BinaryDataset validation") {
  Matrix X(4, 2);
  X << 1, 0.1, 1, 0.2, 1, 0.3, 1, 0.4;
  Vector y(4);
  y << 0, 1, 0, 1;
  CHECK_NOTHROW(BinaryDataset(X, y, {"intercept", "x"}));

  Vector bad = y;
  bad(0) = 2;
  CHECK_THROWS_AS(BinaryDataset(X, bad, {"intercept", "x"}), ValidationError);

  Matrix no_intercept = X;
  no_intercept(2, 0) = 0.5;
  CHECK_THROWS_AS(BinaryDataset(no_intercept, y, {"intercept", "x"}), ValidationError);

  Matrix inf = X;
  inf(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(BinaryDataset(inf, y, {"intercept", "x"}), ValidationError);

  CHECK_THROWS_AS(BinaryDataset(X.topRows(2), y.head(2), {"intercept", "x"}), ValidationError);
}

TEST_CASE("name parsing") {
  CHECK(parse_link_family("cloglog") == LinkFamily::CLogLog);
  CHECK(parse_model_form("nonlinear").tag == ModelFormTag::Nonlinear);
  CHECK(parse_column_transform("sin") == ColumnTransform::Sin);
  CHECK_THROWS_AS(parse_link_family("cauchit"), ValidationError);
}

TEST_CASE("seed derivation and normal helpers") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.5758293035489).epsilon(1e-10));
  CHECK(two_sided_normal_p(0.0) == doctest::Approx(1.0));
  std::vector<double> v{1, 2, 3, 4};
  CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
}
