#include <catch2/catch_amalgamated.hpp>

#include "snn/core.hpp"

using namespace snn;

static Dataset tiny(std::vector<int> labels) {
  std::vector<LabeledSample> rows;
  double p = 0.0;
  for (int v : labels) {
    rows.push_back({{p, -p}, ClassLabel(v)});
    p += 1.0;
  }
  return Dataset(std::move(rows));
}

TEST_CASE("class labels are 1 or 2", "[core]") {
  REQUIRE(ClassLabel(1).value == 1);
  REQUIRE(ClassLabel(2).value == 2);
  REQUIRE_THROWS_AS(ClassLabel(0), std::invalid_argument);
  REQUIRE_THROWS_AS(ClassLabel(3), std::invalid_argument);
  REQUIRE_THROWS_AS(ClassLabel(-1), std::invalid_argument);
}

TEST_CASE("dataset construction validates rows", "[core]") {
  REQUIRE_THROWS_AS(Dataset({}), std::invalid_argument);

  std::vector<LabeledSample> mixed;
  mixed.push_back({{0.0, 1.0}, ClassLabel(1)});
  mixed.push_back({{0.0}, ClassLabel(2)});
  REQUIRE_THROWS_AS(Dataset(std::move(mixed)), std::invalid_argument);

  std::vector<LabeledSample> bad;
  bad.push_back({{0.0, std::nan("")}, ClassLabel(1)});
  REQUIRE_THROWS_AS(Dataset(std::move(bad)), std::invalid_argument);

  Dataset ok = tiny({1, 2, 1});
  REQUIRE(ok.size() == 3);
  REQUIRE(ok.d == 2);
}

TEST_CASE("weight vector invariants", "[core]") {
  WeightVector w({0.5, 0.5, 0.0});
  REQUIRE(w.k_support == 2);
  REQUIRE(w.n() == 3);
  REQUIRE(w.sum_sq() == Catch::Approx(0.5));

  REQUIRE_THROWS_AS(WeightVector({0.7, -0.1, 0.4}), std::invalid_argument);
  REQUIRE_THROWS_AS(WeightVector({0.5, 0.4}), std::invalid_argument);
  REQUIRE_THROWS_AS(WeightVector({}), std::invalid_argument);

  // 1e-12 sum tolerance: barely off must be rejected
  REQUIRE_THROWS_AS(WeightVector({0.5, 0.5 + 1e-11}), std::invalid_argument);
}

TEST_CASE("neumaier summation is exact where naive drifts", "[core]") {
  std::vector<double> v(300000, 1.0 / 300000.0);
  REQUIRE(std::abs(neumaier_sum(v) - 1.0) < 1e-15);
}

TEST_CASE("eval report validates ranges", "[core]") {
  REQUIRE_NOTHROW(EvalReport(0.2, 0.1, 1000, 100, 0.01, 0.01));
  REQUIRE_THROWS_AS(EvalReport(1.2, 0.1, 10, 1, 0.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(EvalReport(0.2, -0.1, 10, 1, 0.0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(EvalReport(0.2, 0.1, 10, 1, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("majority class with tie to class 1", "[core]") {
  REQUIRE(majority_class(tiny({1, 1, 2})).value == 1);
  REQUIRE(majority_class(tiny({2, 2})).value == 2);
  REQUIRE(majority_class(tiny({1, 2})).value == 1);
}
