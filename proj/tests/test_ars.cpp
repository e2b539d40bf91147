#include "npglm/ars.hpp"
#include "npglm/core_model.hpp"
#include "npglm/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace npglm;

namespace {

// Rates straight from the set definitions: G = truly positive rows,
// S = rows predicted positive.
double brute_force_ars(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::set<std::size_t> G, notG, S, notS;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    (truth[i] == 1 ? G : notG).insert(i);
    (pred[i] == 1 ? S : notS).insert(i);
  }
  auto overlap = [](const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
    double c = 0;
    for (auto i : a) c += b.count(i);
    return c;
  };
  const double tp = overlap(S, G) / G.size();
  const double tn = overlap(notS, notG) / notG.size();
  const double fp = overlap(S, notG) / notG.size();
  const double fn = overlap(notS, G) / G.size();
  return (fp + fn) / (tp + tn);
}

}  // namespace

TEST_CASE("confusion") {
  const std::vector<int> t{1, 1, 0, 0};
  ConfusionMatrix cm = confusion(t, t);
  CHECK(cm.n11 == 2);
  CHECK(cm.n10 == 0);
  CHECK(cm.n01 == 0);
  CHECK(cm.n00 == 2);

  const std::vector<int> inv{0, 0, 1, 1};
  cm = confusion(inv, t);
  CHECK(cm.n11 == 0);
  CHECK(cm.n10 == 2);
  CHECK(cm.n01 == 2);
  CHECK(cm.n00 == 0);

  cm = confusion(std::vector<int>{1, 1, 1, 0, 0}, std::vector<int>{1, 0, 1, 1, 0});
  CHECK(cm.n11 == 2);
  CHECK(cm.n10 == 1);
  CHECK(cm.n01 == 1);
  CHECK(cm.n00 == 1);

  CHECK_THROWS_AS(confusion(std::vector<int>{1, 0}, std::vector<int>{1}), ValidationError);
  CHECK_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{1}), ValidationError);
}

TEST_CASE("ars arithmetic") {
  const ConfusionMatrix hand{8, 3, 2, 7};
  const ClassificationRates r = rates(hand);
  CHECK(r.tp == doctest::Approx(0.8));
  CHECK(r.tn == doctest::Approx(0.7));
  CHECK(r.fp == doctest::Approx(0.3));
  CHECK(r.fn == doctest::Approx(0.2));
  CHECK(ars(hand) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(ars(ConfusionMatrix{5, 0, 0, 5}, 0.0) == 0.0);
  CHECK_THROWS_AS(ars(ConfusionMatrix{0, 5, 5, 0}, 0.0), ValidationError);
  CHECK(std::isfinite(ars(ConfusionMatrix{0, 5, 5, 0}, 0.5)));
  CHECK(ars(ConfusionMatrix{0, 5, 5, 0}, 0.5) > 10.0);
  CHECK_THROWS_AS(ars(ConfusionMatrix{3, 0, 4, 0}, 0.0), ValidationError);
}

TEST_CASE("ars_sigma") {
  CHECK(ars_sigma(ConfusionMatrix{4, 4, 4, 4}) == doctest::Approx(1.0));
  CHECK(ars_sigma(ConfusionMatrix{1, 1, 1, 1}) == doctest::Approx(2.0));
  CHECK(ars_sigma(ConfusionMatrix{8, 3, 2, 7}) ==
        doctest::Approx(std::sqrt(1.0 / 8 + 1.0 / 3 + 1.0 / 2 + 1.0 / 7)).epsilon(1e-14));
  CHECK(ars_sigma(ConfusionMatrix{8, 3, 2, 7}) == doctest::Approx(1.04938).epsilon(1e-5));
  CHECK_THROWS_AS(ars_sigma(ConfusionMatrix{1, 0, 1, 1}, 0.0), ValidationError);
  CHECK(ars_sigma(ConfusionMatrix{1, 0, 1, 1}, 0.5) == doctest::Approx(std::sqrt(1 / 1.5 * 3 + 1 / 0.5)));
}

TEST_CASE("one-sample test") {
  const ARSResult hand = ars_one_sample_test(ConfusionMatrix{8, 3, 2, 7});
  const double z = std::sqrt(20.0) * std::log(1.0 / 3.0) / std::sqrt(1.0 / 8 + 1.0 / 3 + 1.0 / 2 + 1.0 / 7);
  CHECK(hand.z == doctest::Approx(z).epsilon(1e-12));
  CHECK(hand.z == doctest::Approx(-4.681).epsilon(1e-3));
  CHECK(hand.p_value < 1e-5);
  CHECK(hand.epsilon_used == 0.0);

  // Equal rates on both sides give ARS = 1.
  const ARSResult null = ars_one_sample_test(ConfusionMatrix{5, 5, 5, 5});
  CHECK(null.ars == doctest::Approx(1.0));
  CHECK(null.z == doctest::Approx(0.0));
  CHECK(null.p_value == doctest::Approx(1.0));

  const ARSResult scaled = ars_one_sample_test(ConfusionMatrix{32, 12, 8, 28});
  CHECK(scaled.ars == doctest::Approx(hand.ars).epsilon(1e-12));
  CHECK(std::abs(scaled.z) > std::abs(hand.z));

  const ARSResult perfect = ars_one_sample_test(ConfusionMatrix{20, 0, 0, 20});
  CHECK(perfect.epsilon_used == 0.5);
  CHECK(perfect.ars < 0.06);
  CHECK(perfect.p_value < 0.01);
}

TEST_CASE("two-sample test") {
  std::vector<double> a{0.1, 0.3, 0.2, 0.25, 0.15};
  TwoSampleResult same = ars_two_sample_test(a, a, false);
  CHECK(same.t == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK(ars_two_sample_test(a, a, true).t == 0.0);

  // Means 0.2 and 0.0, sample sd 0.1 each, n = 10: alternate +-0.1/sqrt(10/9).
  std::vector<double> x, y;
  const double d = 0.1 * std::sqrt(9.0 / 10.0);
  for (int i = 0; i < 10; ++i) {
    x.push_back(0.2 + (i % 2 ? d : -d));
    y.push_back(i % 2 ? d : -d);
  }
  const TwoSampleResult r = ars_two_sample_test(x, y, false);
  CHECK(r.t == doctest::Approx(0.2 / (0.1 * std::sqrt(2.0 / 10.0))).epsilon(1e-12));
  CHECK(r.t == doctest::Approx(4.4721).epsilon(1e-4));
  CHECK(r.dof == 18);

  std::vector<double> c{1.0, 1.0}, e{0.0, 0.0};
  const TwoSampleResult inf = ars_two_sample_test(c, e, false);
  CHECK(std::isinf(inf.t));
  CHECK(inf.p_value == 0.0);

  CHECK_THROWS_AS(ars_two_sample_test(std::vector<double>{1.0}, a, false), ValidationError);
  CHECK_THROWS_AS(ars_two_sample_test(x, a, true), ValidationError);
}

TEST_CASE("ars matches brute force on random label vectors") {
  Rng rng(2024);
  int checked = 0;
  while (checked < 1000) {
    const int n = 2 + static_cast<int>(uniform_open(rng) * 49);
    std::vector<int> pred(n), truth(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = uniform_open(rng) < 0.5;
      truth[i] = uniform_open(rng) < 0.5;
    }
    const ConfusionMatrix cm = confusion(pred, truth);
    const bool any_zero = cm.n11 == 0 || cm.n10 == 0 || cm.n01 == 0 || cm.n00 == 0;
    if (any_zero || cm.n11 + cm.n00 == 0) continue;
    CHECK(std::abs(ars(cm) - brute_force_ars(pred, truth)) < 1e-12);
    ++checked;
  }
}

TEST_CASE("label swap, scale invariance and sigma monotonicity") {
  Rng rng(99);
  for (int rep = 0; rep < 300; ++rep) {
    const ConfusionMatrix cm{1.0 + std::floor(uniform_open(rng) * 30), 1.0 + std::floor(uniform_open(rng) * 30),
                             1.0 + std::floor(uniform_open(rng) * 30), 1.0 + std::floor(uniform_open(rng) * 30)};
    // Flipping every predicted label.
    std::vector<int> pred, truth;
    auto push = [&](int p, int t, double count) {
      for (int i = 0; i < count; ++i) {
        pred.push_back(p);
        truth.push_back(t);
      }
    };
    push(1, 1, cm.n11);
    push(1, 0, cm.n10);
    push(0, 1, cm.n01);
    push(0, 0, cm.n00);
    for (int& p : pred) p = 1 - p;
    const ConfusionMatrix swapped = confusion(pred, truth);
    CHECK(swapped.n11 == cm.n01);
    CHECK(swapped.n10 == cm.n00);
    CHECK(swapped.n01 == cm.n11);
    CHECK(swapped.n00 == cm.n10);
    CHECK(std::abs(ars_sigma(swapped) - ars_sigma(cm)) < 1e-14);

    const double c = 1.0 + std::floor(uniform_open(rng) * 9);
    const ConfusionMatrix big{c * cm.n11, c * cm.n10, c * cm.n01, c * cm.n00};
    CHECK(std::abs(ars(big) - ars(cm)) < 1e-12);

    ConfusionMatrix more = cm;
    const int cell = static_cast<int>(uniform_open(rng) * 4);
    (cell == 0 ? more.n11 : cell == 1 ? more.n10 : cell == 2 ? more.n01 : more.n00) += 1.0;
    CHECK(ars_sigma(more) < ars_sigma(cm));
  }
}
