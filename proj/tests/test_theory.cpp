#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "snn/rng.hpp"
#include "snn/theory.hpp"
#include "snn/weights.hpp"

using namespace snn;

namespace {

const double kB1 = 0.1299;
const double kB2 = 10.68;

TheoryConstants validation_constants() { return TheoryConstants(kB1, kB2, 2); }

double closed_knn_regret(int k, int n, int d, double b1, double b2) {
  double scaled = std::pow(static_cast<double>(n), -2.0 / d) * std::pow(static_cast<double>(k), 2.0 / d);
  return b1 / k + b2 * scaled * scaled;
}

}  // namespace

TEST_CASE("constants lock b3 to b1", "[theory]") {
  TheoryConstants tc = validation_constants();
  double b3 = 4.0 * kB1 / std::sqrt(std::numbers::pi);
  REQUIRE(tc.b3 == Catch::Approx(b3).epsilon(1e-15));
  REQUIRE_NOTHROW(TheoryConstants(kB1, kB2, b3, 2));
  REQUIRE_THROWS_AS(TheoryConstants(kB1, kB2, 0.2931, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(TheoryConstants(0.0, 1.0, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(TheoryConstants(1.0, -0.1, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(TheoryConstants(1.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("regret expansion on uniform and snn weights", "[theory]") {
  TheoryConstants tc(0.5, 2.0, 2);
  REQUIRE(asymptotic_regret(knn_weights(10, 100), tc, 100) ==
          Catch::Approx(closed_knn_regret(10, 100, 2, 0.5, 2.0)).epsilon(1e-12));
  TheoryConstants tc3(0.7, 1.3, 3);
  REQUIRE(asymptotic_regret(knn_weights(7, 50), tc3, 50) ==
          Catch::Approx(closed_knn_regret(7, 50, 3, 0.7, 1.3)).epsilon(1e-12));

  TheoryConstants tcv = validation_constants();
  double lam = (tcv.b1 + tcv.b3 * tcv.b3) / tcv.b2;
  WeightVector w = snn_weights(SnnParams(lam, 500, 2));
  int k = w.k_support;
  REQUIRE(k == 19);
  double approx = 0.1732 / k + 4.7467 * k * k / (500.0 * 500.0);
  REQUIRE(asymptotic_regret(w, tcv, 500) == Catch::Approx(approx).epsilon(0.01));

  TheoryConstants flat(0.3, 0.0, 5);
  WeightVector u = knn_weights(4, 30);
  REQUIRE(asymptotic_regret(u, flat, 30) == 0.3 * u.sum_sq());

  REQUIRE_THROWS_AS(asymptotic_regret(u, flat, 29), std::invalid_argument);
}

TEST_CASE("cis expansion is b3 over root k", "[theory]") {
  TheoryConstants tc = validation_constants();
  REQUIRE(asymptotic_cis(knn_weights(25, 400), tc) == Catch::Approx(tc.b3 / 5.0).epsilon(1e-14));
  REQUIRE(asymptotic_cis(knn_weights(5, 400), tc) ==
          Catch::Approx(2.0 * asymptotic_cis(knn_weights(20, 400), tc)).epsilon(1e-14));

  WeightVector w = snn_weights(SnnParams(0.0202, 500, 2));
  double k = w.k_support;
  REQUIRE(asymptotic_cis(w, tc) == Catch::Approx(0.3385 / std::sqrt(k)).epsilon(0.01));
}

TEST_CASE("b1 closed form hits the tabulated values", "[theory]") {
  REQUIRE(gaussian_b1_closed_form(1.0, 2) == Catch::Approx(0.1299).margin(0.0005));
  REQUIRE(gaussian_b1_closed_form(2.076, 1) == Catch::Approx(0.1).margin(0.002));
  REQUIRE(gaussian_b1_closed_form(1.205, 2) == Catch::Approx(0.1).margin(0.002));
  REQUIRE(gaussian_b1_closed_form(0.659, 4) == Catch::Approx(0.1).margin(0.002));
  REQUIRE(gaussian_b1_closed_form(0.314, 8) == Catch::Approx(0.1).margin(0.002));
  REQUIRE(gaussian_b1_closed_form(0.208, 10) == Catch::Approx(0.1).margin(0.002));
  REQUIRE_THROWS_AS(gaussian_b1_closed_form(0.0, 2), std::invalid_argument);
}

TEST_CASE("fixed-k cis ratios", "[theory]") {
  REQUIRE(cis_ratio_bnn_knn(2) == 1.0);
  for (double r : {cis_ratio_ownn_knn(1000000), cis_ratio_bnn_knn(1000000),
                   cis_ratio_bnn_ownn(1000000)})
    REQUIRE(std::abs(r - 1.0) <= 1e-3);
  for (int d = 1; d <= 30; ++d) {
    REQUIRE(cis_ratio_ownn_knn(d) < 1.0);
    REQUIRE(cis_ratio_bnn_knn(d) ==
            Catch::Approx(cis_ratio_bnn_ownn(d) * cis_ratio_ownn_knn(d)).epsilon(1e-12));
  }
}

TEST_CASE("ownn/knn ratio matches a large-n weight oracle", "[theory]") {
  const int n = 10000000;
  for (int d : {1, 2, 5, 10, 20}) {
    int k = knn_k_opt(n, d, 1.0, 1.0);
    double knn_norm = std::sqrt(knn_weights(k, n).sum_sq());
    double ownn_norm = std::sqrt(ownn_weights(n, d, 1.0, 1.0).sum_sq());
    REQUIRE(ownn_norm / knn_norm == Catch::Approx(cis_ratio_ownn_knn(d)).epsilon(0.01));
  }
}

TEST_CASE("snn/ownn ratios at the benchmark constants", "[theory]") {
  TheoryConstants tc = validation_constants();
  RatioPair at_opt = snn_ownn_ratios(tc, tc.b1 / tc.b2);
  REQUIRE(at_opt.regret_ratio == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(at_opt.cis_ratio == Catch::Approx(1.0).margin(1e-12));

  double lam = (tc.b1 + tc.b3 * tc.b3) / tc.b2;
  RatioPair r = snn_ownn_ratios(tc, lam);
  REQUIRE(r.cis_ratio == Catch::Approx(0.9189).margin(0.001));
  REQUIRE(r.regret_ratio == Catch::Approx(1.0305).margin(0.001));

  REQUIRE_THROWS_WITH(snn_ownn_ratios(TheoryConstants(0.2, 0.0, 2), 0.5),
                      "OWNN undefined: B2 = 0");
  REQUIRE_THROWS_AS(snn_ownn_ratios(tc, 0.0), std::invalid_argument);
}

TEST_CASE("lambda0 parameterization agrees with the lambda route", "[theory]") {
  RatioPair base = snn_ownn_ratios_lambda0(0.1299, 2, 0.0);
  REQUIRE(base.regret_ratio == 1.0);
  REQUIRE(base.cis_ratio == 1.0);

  Rng rng(2718);
  for (int t = 0; t < 1000; ++t) {
    double b1 = std::exp(-3.0 + 4.0 * rng.uniform01());
    double b2 = std::exp(-2.0 + 5.0 * rng.uniform01());
    int d = 1 + static_cast<int>(rng.uniform_below(10));
    double lam0 = 3.0 * rng.uniform01();
    TheoryConstants tc(b1, b2, d);
    double lam = (b1 + lam0 * tc.b3 * tc.b3) / b2;
    RatioPair via_lambda = snn_ownn_ratios(tc, lam);
    RatioPair via_lambda0 = snn_ownn_ratios_lambda0(b1, d, lam0);
    REQUIRE(std::abs(via_lambda.regret_ratio - via_lambda0.regret_ratio) <= 1e-12);
    REQUIRE(std::abs(via_lambda.cis_ratio - via_lambda0.cis_ratio) <= 1e-12);
  }

  for (int d : {1, 5, 20}) {
    double prev = 2.0;
    for (double lam0 = 0.0; lam0 <= 5.0; lam0 += 0.25) {
      double c = snn_ownn_ratios_lambda0(0.1299, d, lam0).cis_ratio;
      REQUIRE(c < prev);
      prev = c;
    }
  }
}

TEST_CASE("relative gain favors stability at small b1", "[theory]") {
  for (int d = 1; d <= 50; ++d) REQUIRE(relative_gain(0.2, d) > 1.0);
  for (int d : {1, 4, 8, 40}) {
    RatioPair r = snn_ownn_ratios_lambda0(0.2, d, 1.0);
    double direct = (1.0 - r.cis_ratio) / (r.regret_ratio - 1.0);
    REQUIRE(relative_gain(0.2, d) == Catch::Approx(direct).epsilon(1e-14));
  }
  for (int d : {1, 4, 8, 40}) {
    double lo = relative_gain(1e-6, d);
    REQUIRE(lo > 0.0);
    REQUIRE(std::isfinite(lo));
    REQUIRE(relative_gain(1.0001e-6, d) == Catch::Approx(lo).epsilon(1e-3));
    REQUIRE(lo > relative_gain(0.2, d));
  }
  Rng rng(99);
  for (int t = 0; t < 100; ++t)
    REQUIRE(relative_gain(std::exp(-4.0 + 5.0 * rng.uniform01()),
                          1 + static_cast<int>(rng.uniform_below(30))) > 0.0);
  REQUIRE_THROWS_AS(relative_gain(0.0, 3), std::invalid_argument);
}

TEST_CASE("validation curves at the tuned k", "[theory]") {
  ValidationCurve s = validation_curves(500, ValidationMethod::snn);
  REQUIRE(s.k == 19);
  REQUIRE(s.cis == Catch::Approx(0.078).margin(0.001));
  ValidationCurve o = validation_curves(500, ValidationMethod::ownn);
  REQUIRE(o.k == 16);
  REQUIRE(o.cis == Catch::Approx(0.085).margin(0.001));
  for (double reg : {s.regret, o.regret}) {
    REQUIRE(reg > 0.0);
    REQUIRE(reg < 0.02);
  }
  REQUIRE(validation_curves(8, ValidationMethod::ownn).k >= 1);
  REQUIRE_THROWS_AS(validation_curves(7, ValidationMethod::snn), std::invalid_argument);
}

TEST_CASE("integer regret scan lands on the closed-form k", "[theory]") {
  for (double b1 : {1.0, 0.1299}) {
    double b2 = b1 == 1.0 ? 1.0 : 10.68;
    for (int d : {1, 2, 4}) {
      TheoryConstants tc(b1, b2, d);
      for (int n : {1000, 10000, 100000}) {
        int best_k = 1;
        double best = closed_knn_regret(1, n, d, b1, b2);
        for (int k = 2; k <= n; ++k) {
          double r = closed_knn_regret(k, n, d, b1, b2);
          if (r < best) {
            best = r;
            best_k = k;
          }
        }
        REQUIRE(std::abs(best_k - knn_k_opt(n, d, b1, b2)) <= 1);
        REQUIRE(asymptotic_regret(knn_weights(best_k, n), tc, n) ==
                Catch::Approx(best).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("snn weights solve the stability-penalized program", "[theory]") {
  struct Setup {
    TheoryConstants tc;
    double lam0;
    int n;
  };
  for (const Setup& s : {Setup{validation_constants(), 1.0, 500},
                         Setup{TheoryConstants(1.0, 2.0, 3), 0.5, 300}}) {
    double lam = (s.tc.b1 + s.lam0 * s.tc.b3 * s.tc.b3) / s.tc.b2;
    WeightVector opt = snn_weights(SnnParams(lam, s.n, s.tc.d));
    auto objective = [&](const WeightVector& w) {
      double cis = asymptotic_cis(w, s.tc);
      return asymptotic_regret(w, s.tc, s.n) + s.lam0 * cis * cis;
    };
    double best = objective(opt);
    int k = opt.k_support;
    Rng rng(1234);
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> v(static_cast<std::size_t>(s.n), 0.0);
      for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] = -std::log(1.0 - rng.uniform01());
      std::sort(v.begin(), v.begin() + k, std::greater<double>());
      double sum = neumaier_sum(v);
      for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i)] /= sum;
      REQUIRE(best <= objective(WeightVector(std::move(v))) + 1e-9);
    }
  }
}

TEST_CASE("numeric constants for the bivariate benchmark", "[theory][quadrature]") {
  TheoryConstants tc = gaussian_constants_numeric(make_simulation("validation"));
  REQUIRE(tc.b1 == Catch::Approx(0.1299).margin(0.001));
  REQUIRE(tc.b2 == Catch::Approx(10.68).margin(0.1));
  REQUIRE(tc.b3 == Catch::Approx(0.2931).margin(0.002));
  REQUIRE(std::abs(tc.b1 - gaussian_b1_closed_form(1.0, 2)) <= 1e-3);
}

TEST_CASE("point quadrature at d = 1 matches the closed form", "[theory][quadrature]") {
  GaussianProblem p = make_simulation("1", 1);
  TheoryConstants tc = gaussian_constants_numeric(p);
  REQUIRE(tc.b1 == Catch::Approx(gaussian_b1_closed_form(2.076, 1)).margin(1e-6));
  REQUIRE(tc.b2 > 0.0);
}

TEST_CASE("hyperplane monte carlo at d = 5 tracks the closed form", "[theory][quadrature]") {
  GaussianMixture c1, c2;
  int d = 5;
  std::vector<double> eye(25, 0.0);
  for (int i = 0; i < d; ++i) eye[static_cast<std::size_t>(i) * d + i] = 1.0;
  c1.weights = {1.0};
  c1.means = {std::vector<double>(5, 0.0)};
  c1.covs = {eye};
  c2.weights = {1.0};
  c2.means = {std::vector<double>(5, 0.5)};
  c2.covs = {eye};
  Region r{std::vector<double>(5, -6.0), std::vector<double>(5, 6.5)};
  TheoryConstants tc = gaussian_constants_numeric(GaussianProblem(5, 1.0 / 3.0, c1, c2, r));
  REQUIRE(tc.b1 == Catch::Approx(gaussian_b1_closed_form(0.5, 5)).epsilon(0.02));
  REQUIRE(tc.b2 > 0.0);
}

TEST_CASE("symmetric problems have vanishing b2", "[theory][quadrature]") {
  GaussianMixture c1, c2;
  c1.weights = {1.0};
  c1.means = {{0.0, 0.0}};
  c1.covs = {{1.0, 0.0, 0.0, 1.0}};
  c2.weights = {1.0};
  c2.means = {{1.0, 1.0}};
  c2.covs = {{1.0, 0.0, 0.0, 1.0}};
  Region r{{-2.0, -2.0}, {3.0, 3.0}};
  TheoryConstants tc = gaussian_constants_numeric(GaussianProblem(2, 0.5, c1, c2, r));
  REQUIRE(tc.b2 >= 0.0);
  REQUIRE(tc.b2 <= 1e-4);
}

TEST_CASE("quadrature guards its problem family and region", "[theory][quadrature]") {
  REQUIRE_THROWS_AS(gaussian_constants_numeric(make_simulation("2", 2)), std::invalid_argument);

  GaussianMixture c1, c2;
  c1.weights = {1.0};
  c1.means = {{0.0, 0.0}};
  c1.covs = {{1.0, 0.0, 0.0, 1.0}};
  c2.weights = {1.0};
  c2.means = {{1.0, 1.0}};
  c2.covs = {{1.0, 0.0, 0.0, 1.0}};
  REQUIRE_THROWS_AS(gaussian_constants_numeric(GaussianProblem(2, 1.0 / 3.0, c1, c2)),
                    std::invalid_argument);

  Region off{{-2.0, -2.0}, {-1.0, -1.0}};
  REQUIRE_THROWS_WITH(gaussian_constants_numeric(GaussianProblem(2, 1.0 / 3.0, c1, c2, off)),
                      "decision boundary outside region");
}
