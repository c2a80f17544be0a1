#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "snn/rng.hpp"

using namespace snn;

TEST_CASE("same seed reproduces the stream", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform01() == b.uniform01());
  Rng c(42), e(43);
  bool differ = false;
  for (int i = 0; i < 64 && !differ; ++i) differ = c.uniform01() != e.uniform01();
  REQUIRE(differ);
}

TEST_CASE("uniform01 stays in [0,1) and looks flat", "[rng]") {
  Rng r(7);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  REQUIRE(s / n == Catch::Approx(0.5).margin(0.005));
}

TEST_CASE("uniform_below covers its range without bias", "[rng]") {
  Rng r(11);
  std::vector<long> counts(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto v = r.uniform_below(5);
    REQUIRE(v < 5);
    ++counts[static_cast<std::size_t>(v)];
  }
  for (long c : counts) REQUIRE(std::abs(c - n / 5.0) < 5.0 * std::sqrt(n / 5.0));
  REQUIRE_THROWS_AS(r.uniform_below(0), std::invalid_argument);
}

TEST_CASE("normal draws have the right first two moments", "[rng]") {
  Rng r(123);
  const int n = 400000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    s += z;
    s2 += z * z;
  }
  double mean = s / n;
  double var = s2 / n - mean * mean;
  REQUIRE(mean == Catch::Approx(0.0).margin(0.01));
  REQUIRE(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("shuffle yields a permutation, deterministically per seed", "[rng]") {
  Rng r1(5), r2(5);
  auto p1 = r1.permutation(40);
  auto p2 = r2.permutation(40);
  REQUIRE(p1 == p2);
  std::set<int> seen(p1.begin(), p1.end());
  REQUIRE(seen.size() == 40);
  REQUIRE(*seen.begin() == 0);
  REQUIRE(*seen.rbegin() == 39);
}

TEST_CASE("substream seeds separate replications and purposes", "[rng]") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t rep = 0; rep < 50; ++rep)
    for (std::uint64_t purpose = 0; purpose < 6; ++purpose)
      seeds.insert(substream_seed(42, rep, purpose));
  REQUIRE(seeds.size() == 300);
  REQUIRE(substream_seed(42, 3, 1) == substream_seed(42, 3, 1));
  REQUIRE(substream_seed(42, 3, 1) != substream_seed(43, 3, 1));
}
