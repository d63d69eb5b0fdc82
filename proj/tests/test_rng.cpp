#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qgsf/rng.hpp"

using qgsf::RngStream;

TEST_CASE("philox4x64-10 matches the Random123 known-answer vectors") {
  const auto zero = qgsf::philox4x64({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x16554d9eca36314cULL);
  CHECK(zero[1] == 0xdb20fe9d672d0fdcULL);
  CHECK(zero[2] == 0xd7e772cee186176bULL);
  CHECK(zero[3] == 0x7e68b68aec7ba23bULL);

  const std::uint64_t ones = ~0ULL;
  const auto full = qgsf::philox4x64({ones, ones, ones, ones}, {ones, ones});
  CHECK(full[0] == 0x87b092c3013fe90bULL);
  CHECK(full[1] == 0x438c3c67be8d0224ULL);
  CHECK(full[2] == 0x9cc7d7c69cd777b6ULL);
  CHECK(full[3] == 0xa09caebf594f0ba0ULL);
}

TEST_CASE("uniform01 stays inside the open unit interval") {
  RngStream s(7, 1);
  const double first = s.uniform01();
  CHECK(first > 0.0);
  CHECK(first < 1.0);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform01();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.002);
}

TEST_CASE("identical keys replay identical sequences") {
  RngStream a(42, 9), b(42, 9);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
  for (int i = 0; i < 1000; ++i) REQUIRE(a.standard_normal() == b.standard_normal());
  for (int i = 0; i < 100; ++i) REQUIRE(a.chi_squared(0.7) == b.chi_squared(0.7));
}

TEST_CASE("odd numbers of normal draws keep copies in lockstep") {
  RngStream a(3, 4);
  for (int i = 0; i < 3; ++i) a.standard_normal();
  RngStream fork = a;  // holds the cached second Box-Muller variate
  RngStream b(3, 4);
  for (int i = 0; i < 3; ++i) b.standard_normal();
  for (int i = 0; i < 11; ++i) {
    const double x = a.standard_normal();
    REQUIRE(x == fork.standard_normal());
    REQUIRE(x == b.standard_normal());
  }
}

TEST_CASE("standard normal moments") {
  RngStream s(11, 0);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.standard_normal();
    REQUIRE(std::isfinite(z));
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.003);
  CHECK(std::abs(var - 1.0) < 0.005);
}

TEST_CASE("chi-squared with fractional degrees of freedom") {
  RngStream s(5, 5);
  const int n = 1000000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.chi_squared(3.7);
    REQUIRE(x >= 0.0);
    sum += x;
  }
  // mean df, variance 2 df; 3 sigma = 3 sqrt(7.4 / 1e6) ~ 0.008
  CHECK(std::abs(sum / n - 3.7) < 0.03);

  SUBCASE("shape below one") {
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) s2 += s.chi_squared(0.3);
    // sd of the mean: sqrt(0.6 / 1e6) ~ 7.7e-4
    CHECK(std::abs(s2 / n - 0.3) < 0.004);
  }
}

TEST_CASE("chi-squared(2) is exponential with mean 2") {
  RngStream s(19, 2);
  const std::size_t n = 200000;
  std::vector<double> xs(n);
  for (double& x : xs) x = s.chi_squared(2.0);
  std::sort(xs.begin(), xs.end());
  std::vector<double> cdf(n);
  for (std::size_t i = 0; i < n; ++i) cdf[i] = 1.0 - std::exp(-xs[i] / 2.0);
  CHECK(oracle::ks_statistic(xs, cdf) < oracle::ks_critical_1pct(n));
}

TEST_CASE("invalid distribution parameters are rejected") {
  RngStream s(1, 1);
  CHECK_THROWS_AS(s.chi_squared(0.0), std::invalid_argument);
  CHECK_THROWS_AS(s.chi_squared(-1.5), std::invalid_argument);
  CHECK_THROWS_AS(s.gamma(0.0), std::invalid_argument);
  CHECK_THROWS_AS(s.exponential(0.0), std::invalid_argument);
}

TEST_CASE("distinct streams are uncorrelated") {
  RngStream a(100, qgsf::derive_stream_id({1, 0})), b(100, qgsf::derive_stream_id({1, 1}));
  const int n = 100000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform01(), y = b.uniform01();
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("stream id derivation is order sensitive and stable") {
  CHECK(qgsf::derive_stream_id({1, 2, 3}) == qgsf::derive_stream_id({1, 2, 3}));
  CHECK(qgsf::derive_stream_id({1, 2, 3}) != qgsf::derive_stream_id({3, 2, 1}));
  CHECK(qgsf::derive_stream_id({0, 0}) != qgsf::derive_stream_id({0}));
  const RngStream parent(8, 8);
  CHECK(parent.substream(1).stream_id() == parent.substream(1).stream_id());
  CHECK(parent.substream(1).stream_id() != parent.substream(2).stream_id());
  CHECK(parent.substream(1).seed() == 8);
}
