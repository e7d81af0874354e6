#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tailchain/error.hpp"
#include "tailchain/random.hpp"
#include "tailchain/response.hpp"

using namespace tailchain;

namespace {

Excursion physical(std::vector<double> hs, std::vector<double> ws, std::int64_t a, std::int64_t i_star) {
  Excursion e;
  e.a = e.lo = a;
  e.b = e.hi = a + static_cast<std::int64_t>(hs.size()) - 1;
  e.i_star = i_star;
  e.y.assign(hs.size(), Vec2{1.0, 1.0});
  e.theta_h.assign(hs.size(), 0.0);
  e.theta_w.assign(hs.size(), 0.0);
  e.hs = std::move(hs);
  e.ws = std::move(ws);
  return e;
}

}  // namespace

TEST(ExposedArea, Values) {
  EXPECT_NEAR(exposed_area(0.0), 1.0, 1e-12);
  EXPECT_NEAR(exposed_area(45.0), 1.41421, 1e-5);
  EXPECT_NEAR(exposed_area(30.0), 1.15470, 1e-5);
}

TEST(ExposedArea, PeriodAndSymmetry) {
  for (double t = 0.0; t < 90.0; t += 3.7) {
    const double a = exposed_area(t);
    EXPECT_GE(a, 1.0);
    EXPECT_LE(a, std::sqrt(2.0) + 1e-12);
    for (int q = 1; q < 4; ++q) EXPECT_NEAR(exposed_area(t + 90.0 * q), a, 1e-12);
    EXPECT_NEAR(exposed_area(std::fmod(90.0 - t, 90.0)), a, 1e-12);
  }
}

TEST(InlineWind, Values) {
  EXPECT_NEAR(inline_wind(10.0, 30.0, 30.0), 10.0, 1e-12);
  EXPECT_NEAR(inline_wind(10.0, 120.0, 30.0), 0.0, 1e-12);
  EXPECT_NEAR(inline_wind(12.0, 100.0, 40.0), 6.0, 1e-12);
  EXPECT_LT(inline_wind(5.0, 180.0, 0.0), 0.0);
}

TEST(Instantaneous, Values) {
  const ResponseConfig cfg{1.0, 8.0};
  EXPECT_DOUBLE_EQ(instantaneous_response(0.0, 0.0, 0.0, 0.0, cfg), 0.0);
  EXPECT_NEAR(instantaneous_response(10.0, 0.0, 0.0, 0.0, cfg), 200.0, 1e-12);
  EXPECT_NEAR(instantaneous_response(8.0, 3.0, 0.0, 0.0, cfg), 9.0, 1e-12);
  const double below = instantaneous_response(8.0 - 1e-9, 3.0, 0.0, 0.0, cfg);
  const double above = instantaneous_response(8.0 + 1e-9, 3.0, 0.0, 0.0, cfg);
  EXPECT_NEAR(below, above, 1e-6);
}

TEST(Instantaneous, NonNegative) {
  Rng rng(1);
  const ResponseConfig cfg{0.3, 5.0};
  for (int i = 0; i < 1000; ++i) {
    const double r = instantaneous_response(12.0 * uniform01(rng), 30.0 * uniform01(rng), 360.0 * uniform01(rng),
                                            360.0 * uniform01(rng), cfg);
    EXPECT_GE(r, 0.0);
  }
}

TEST(ResponseConfig, Validation) {
  EXPECT_THROW((ResponseConfig{0.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((ResponseConfig{1.0, -1.0}.validate()), ConfigError);
  const auto d = default_response_configs();
  ASSERT_EQ(d.size(), 2u);
  for (const auto& c : d) EXPECT_NO_THROW(c.validate());
}

TEST(Functionals, ShortExcursionIsEmpty) {
  const auto e = physical({6, 7, 9, 7, 6}, {10, 11, 12, 11, 10}, 0, 2);
  const ResponseConfig cfg{1.0, 5.0};
  const auto m = rmax(e, cfg), s = rsum(e, cfg);
  EXPECT_TRUE(m.empty);
  EXPECT_TRUE(s.empty);
  EXPECT_DOUBLE_EQ(m.value, 0.0);
  EXPECT_DOUBLE_EQ(s.value, 0.0);
}

TEST(Functionals, BruteForceRecount) {
  const std::vector<double> hs{6.2, 7.0, 8.1, 9.5, 10.0, 9.0, 7.7, 6.9, 6.1};
  const std::vector<double> ws{14, 15, 17, 18, 20, 19, 18, 16, 13};
  const auto e = physical(hs, ws, 100, 104);
  const ResponseConfig cfg{0.5, 6.0};
  double mx = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (std::abs(static_cast<int>(i) - 4) <= 2) continue;
    const double r = instantaneous_response(hs[i], ws[i], 0.0, 0.0, cfg);
    mx = std::max(mx, r);
    sum += r;
  }
  EXPECT_NEAR(rmax(e, cfg).value, mx, 1e-12);
  EXPECT_NEAR(rsum(e, cfg).value, sum, 1e-12);
  EXPECT_GE(rsum(e, cfg).value, rmax(e, cfg).value);
  EXPECT_FALSE(rmax(e, cfg).empty);
}

TEST(Functionals, InvariantUnderReflection) {
  const std::vector<double> hs{6.2, 7.0, 8.1, 9.5, 10.0, 9.0, 7.7, 6.9, 6.1};
  const std::vector<double> ws{14, 15, 17, 18, 20, 19, 18, 16, 13};
  const auto e = physical(hs, ws, 0, 4);
  const auto r = physical({hs.rbegin(), hs.rend()}, {ws.rbegin(), ws.rend()}, 0, 4);
  for (const auto& cfg : default_response_configs()) {
    EXPECT_NEAR(rmax(e, cfg).value, rmax(r, cfg).value, 1e-12);
    EXPECT_NEAR(rsum(e, cfg).value, rsum(r, cfg).value, 1e-12);
  }
}
