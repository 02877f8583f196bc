#include <gtest/gtest.h>

#include <random>

#include <politishift/stats.hpp>

using namespace politishift;

TEST(Wilson, ThreeOfTen) {
  const auto ci = wilson_interval(3, 10);
  EXPECT_NEAR(ci.lo, 0.108, 1e-3);
  EXPECT_NEAR(ci.hi, 0.603, 1e-3);
}

TEST(Wilson, EdgesAndContainment) {
  EXPECT_TRUE(std::isnan(wilson_interval(0, 0).lo));
  EXPECT_EQ(wilson_interval(0, 20).lo, 0.0);
  EXPECT_EQ(wilson_interval(20, 20).hi, 1.0);
  for (std::size_t n = 1; n <= 40; ++n)
    for (std::size_t k = 0; k <= n; ++k) {
      const auto ci = wilson_interval(k, n);
      const double p = static_cast<double>(k) / static_cast<double>(n);
      EXPECT_LE(ci.lo, p + 1e-12);
      EXPECT_GE(ci.hi, p - 1e-12);
    }
}

TEST(MannWhitney, UMatchesPairEnumeration) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> x(2 + rng() % 19), y(2 + rng() % 19);
    for (auto& v : x) v = static_cast<double>(rng() % 8);
    for (auto& v : y) v = static_cast<double>(rng() % 8);
    double u = 0.0;
    for (double a : x)
      for (double b : y) u += a > b ? 1.0 : a == b ? 0.5 : 0.0;
    const auto r = mann_whitney(x, y);
    EXPECT_DOUBLE_EQ(r.u, u);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    // swapping samples mirrors U and keeps p
    const auto s = mann_whitney(y, x);
    EXPECT_DOUBLE_EQ(s.u, static_cast<double>(x.size() * y.size()) - u);
    EXPECT_NEAR(s.p_value, r.p_value, 1e-12);
  }
}

TEST(MannWhitney, IdenticalAndSeparated) {
  std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_GE(mann_whitney(a, a).p_value, 0.99);
  EXPECT_LT(mann_whitney(std::vector<double>(50, 1.0), std::vector<double>(50, 100.0)).p_value, 0.001);
  EXPECT_EQ(mann_whitney(std::vector<double>(5, 2.0), std::vector<double>(5, 2.0)).p_value, 1.0);
  EXPECT_THROW(mann_whitney({1.0}, {1.0, 2.0}), DataError);
}

TEST(MannWhitney, KnownValue) {
  // No ties, n1 = n2 = 10, complete separation: U = 0, mu = 50,
  // sigma = sqrt(100 * 21 / 12), z = -(50 - 0.5) / sigma.
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(10 + i);
  }
  const auto r = mann_whitney(x, y);
  EXPECT_EQ(r.u, 0.0);
  const double z = -49.5 / std::sqrt(175.0);
  EXPECT_NEAR(r.z, z, 1e-12);
  EXPECT_NEAR(r.p_value, std::erfc(-z / std::sqrt(2.0)), 1e-12);
}

TEST(EmpiricalCdf, StepFunction) {
  EmpiricalCdf f({3, 1, 2, 2});
  EXPECT_EQ(f(0.5), 0.0);
  EXPECT_EQ(f(1), 0.25);
  EXPECT_EQ(f(2), 0.75);
  EXPECT_EQ(f(2.5), 0.75);
  EXPECT_EQ(f(3), 1.0);
  const auto steps = f.steps();
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[1], (std::pair<double, double>{2.0, 0.75}));
  EXPECT_TRUE(std::isnan(EmpiricalCdf{}(1.0)));
}

TEST(EmpiricalCdf, RandomOracle) {
  std::mt19937_64 rng(9);
  std::vector<double> v(300);
  for (auto& x : v) x = static_cast<double>(rng() % 50) / 7.0;
  EmpiricalCdf f(v);
  for (int q = -1; q <= 60; ++q) {
    const double x = q / 7.0;
    const auto count = std::count_if(v.begin(), v.end(), [&](double a) { return a <= x; });
    EXPECT_DOUBLE_EQ(f(x), static_cast<double>(count) / 300.0);
  }
}

TEST(Calendar, IsoWeeksAndDates) {
  const auto ts = parse_date("2022-10-02");  // a Sunday
  EXPECT_EQ(format_date(iso_week_start(ts + 3600)), "2022-09-26");
  EXPECT_EQ(format_date(iso_week_start(parse_date("2022-09-26"))), "2022-09-26");
  EXPECT_EQ(format_date(iso_week_start(parse_date("1970-01-01"))), "1969-12-29");
  EXPECT_EQ(format_date(iso_week_start(-1)), "1969-12-29");
  EXPECT_EQ(parse_date("1970-01-02"), 86400);
  EXPECT_THROW(parse_date("2022-02-30"), UsageError);
  EXPECT_THROW(parse_date("22/10/01"), UsageError);
  const auto r = parse_date_range("2022-08-26..2022-11-01");
  EXPECT_TRUE(r.contains(parse_date("2022-11-01") + 86399));
  EXPECT_FALSE(r.contains(parse_date("2022-11-02")));
  EXPECT_FALSE(r.contains(parse_date("2022-08-25")));
  EXPECT_THROW(parse_date_range("2022-08-26"), UsageError);
  EXPECT_THROW(parse_date_range("2022-08-26..2022-08-01"), UsageError);
}
