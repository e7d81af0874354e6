#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tailchain/data.hpp"
#include "tailchain/directional.hpp"
#include "tailchain/engine.hpp"
#include "tailchain/error.hpp"
#include "tailchain/stats.hpp"

using namespace tailchain;

namespace {

WaveDirModel spread_model(double phi, Lambda lambda) {
  WaveDirModel m;
  m.phi = {phi};
  m.lambda = lambda;
  Rng rng(1);
  m.changes.resize(2000);
  for (auto& c : m.changes) c = 8.0 * standard_normal(rng);
  std::sort(m.changes.begin(), m.changes.end());
  return m;
}

WindOffsetModel still_wind() {
  WindOffsetModel w;
  w.phi = {0.5};
  w.residuals = ResidualSample(1, 1, {0.0}, {0.0});
  return w;
}

}  // namespace

TEST(Circular, Differences) {
  EXPECT_DOUBLE_EQ(circular_difference(123.0, 123.0), 0.0);
  EXPECT_DOUBLE_EQ(circular_difference(10.0, 350.0), 20.0);
  EXPECT_DOUBLE_EQ(circular_difference(350.0, 10.0), -20.0);
  EXPECT_DOUBLE_EQ(circular_difference(180.0, 0.0), -180.0);
  for (double a = 0.0; a < 360.0; a += 17.3)
    for (double b = 0.0; b < 360.0; b += 23.9) {
      const double d = circular_difference(a, b);
      EXPECT_GE(d, -180.0);
      EXPECT_LT(d, 180.0);
      if (d != -180.0) EXPECT_NEAR(d, -circular_difference(b, a), 1e-12);
    }
}

TEST(Circular, Wrap) {
  EXPECT_DOUBLE_EQ(wrap_degrees(-10.0), 350.0);
  EXPECT_DOUBLE_EQ(wrap_degrees(720.0), 0.0);
  EXPECT_LT(wrap_degrees(-1e-18), 360.0);
}

TEST(Zeta, Values) {
  const Lambda l{1.0, 3.0, 0.5};
  EXPECT_DOUBLE_EQ(zeta(0.0, l), 2.0);
  EXPECT_NEAR(zeta(2.0, l), 1.450392472, 1e-9);
  EXPECT_NEAR(zeta(1e6, l), 1.0, 1e-9);
}

TEST(HeteroscedasticAR, RecoversParameters) {
  const Lambda truth{0.5, 2.0, 0.3};
  Rng rng(2);
  std::vector<ChangeSegment> segs;
  for (int s = 0; s < 500; ++s) {
    ChangeSegment seg;
    double d = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double h = 10.0 * uniform01(rng);
      d = 0.5 * d + zeta(h, truth) * standard_normal(rng);
      seg.delta.push_back(d);
      seg.hs.push_back(h);
    }
    segs.push_back(std::move(seg));
  }
  const auto f = fit_heteroscedastic_ar(segs, 1);
  EXPECT_NEAR(f.phi[0], 0.5, 0.1);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(f.lambda[j], truth[j], 0.2 * truth[j]) << j;
}

TEST(WaveDir, ProbitRoundTrip) {
  const auto m = spread_model(0.0, {1, 1, 1});
  for (std::size_t i = 5; i + 5 < m.changes.size(); i += 97) {
    const double c = m.changes[i];
    EXPECT_NEAR(m.from_probit(m.probit(c)), c, 1e-9);
    EXPECT_NEAR(m.F_inverse(m.F(c)), c, 1e-9);
  }
}

TEST(WaveDir, FittedOnStormData) {
  const auto d = prepare_data(generate_synthetic(SyntheticSpec{}));
  for (auto side : {Direction::forward, Direction::backward}) {
    const auto m = fit_wave_direction(d.excursions, side);
    for (double l : m.lambda) EXPECT_GT(l, 0.0);
    EXPECT_GT(zeta(1.0, m.lambda), zeta(8.0, m.lambda));
    const auto w = fit_wind_offset(d.excursions, side);
    EXPECT_TRUE(w.stationary());
  }
}

TEST(WaveDir, DegenerateAndShortInputs) {
  SyntheticSpec spec;
  spec.n = 30000;
  auto d = prepare_data(generate_synthetic(spec));
  auto flat = d.excursions;
  for (auto& e : flat) std::fill(e.theta_h.begin(), e.theta_h.end(), 45.0);
  EXPECT_THROW(fit_wave_direction(flat, Direction::forward), FitError);
  std::span<const Excursion> few(d.excursions.data(), 5);
  EXPECT_THROW(fit_wave_direction(few, Direction::forward), InsufficientDataError);
}

TEST(WindOffset, Stationarity) {
  EXPECT_FALSE(ar_stationary(std::vector<double>{1.0}));
  EXPECT_TRUE(ar_stationary(std::vector<double>{0.5}));
  EXPECT_FALSE(ar_stationary(std::vector<double>{0.5, 0.6}));
  EXPECT_TRUE(ar_stationary(std::vector<double>{0.5, -0.3}));
}

TEST(SimulateDirections, ZeroNoiseKeepsWaveDirection) {
  WaveDirModel wave;
  wave.phi = {0.5};
  wave.lambda = {1e-12, 1e-12, 1.0};
  wave.changes.assign(50, 0.0);
  const DirectionModels m{wave, still_wind()};
  const std::vector<double> hs{2, 3, 5, 4, 3, 2};
  Rng rng(3);
  const auto p = simulate_directions(m, m, hs, 2, 100.0, 110.0, rng);
  ASSERT_EQ(p.theta_h.size(), hs.size());
  for (double t : p.theta_h) EXPECT_DOUBLE_EQ(t, 100.0);
}

TEST(SimulateDirections, OutputsWrapped) {
  const DirectionModels m{spread_model(0.7, {40.0, 200.0, 0.3}), still_wind()};
  std::vector<double> hs(200, 1.0);
  Rng rng(4);
  const auto p = simulate_directions(m, m, hs, 100, 355.0, 5.0, rng);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    EXPECT_GE(p.theta_h[i], 0.0);
    EXPECT_LT(p.theta_h[i], 360.0);
    EXPECT_GE(p.theta_w[i], 0.0);
    EXPECT_LT(p.theta_w[i], 360.0);
  }
}

TEST(SimulateDirections, LargeSeasVaryLess) {
  const DirectionModels m{spread_model(0.0, {0.1, 3.0, 0.5}), still_wind()};
  Rng rng(5);
  auto step_var = [&](double hs) {
    std::vector<double> d(10000);
    for (auto& v : d) {
      DirectionWalker w(m, 180.0, 180.0, rng);
      w.advance(hs, rng);
      v = circular_difference(w.theta_h(), 180.0);
    }
    return std::pair{variance(d), variance(d) * std::sqrt(2.0 / 9999.0)};
  };
  const auto [big, se_big] = step_var(10.0);
  const auto [small, se_small] = step_var(0.5);
  EXPECT_LT(big + 3.0 * std::hypot(se_big, se_small), small);
}
