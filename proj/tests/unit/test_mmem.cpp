#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tailchain/data.hpp"
#include "tailchain/engine.hpp"
#include "tailchain/error.hpp"
#include "tailchain/mmem.hpp"

using namespace tailchain;

namespace {

MMEMParams noise_free(int k, double alpha, double u) {
  MMEMParams p;
  p.k = k;
  p.u = u;
  p.alpha0 = IrregularMatrix::chain(k, 2, alpha);
  p.beta0 = IrregularMatrix::chain(k, 2, 0.0);
  const std::size_t m = p.alpha0.size();
  p.mu.assign(m, 0.0);
  p.sigma2.assign(m, 1.0);
  p.residuals = ResidualSample(1, m, std::vector<double>(m, 0.0), std::vector<double>(m, 0.0));
  return p;
}

// Windows of a known MMEM(1): entries (0,1), (1,0), (1,1) with independent
// standard normal residuals.
std::vector<ChainWindow> mmem1_windows(std::size_t n, std::uint64_t seed, double u) {
  const double a[3] = {0.6, 0.8, 0.5};
  const double b[3] = {0.3, 0.2, 0.4};
  Rng rng(seed);
  std::vector<ChainWindow> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = u + std::exponential_distribution<double>{}(rng);
    double v[3];
    for (int q = 0; q < 3; ++q) v[q] = a[q] * y + std::pow(y, b[q]) * standard_normal(rng);
    out.push_back({{y, v[0]}, {v[1], v[2]}});
  }
  return out;
}

const PreparedData& full_data() {
  static const PreparedData d = prepare_data(generate_synthetic(SyntheticSpec{}));
  return d;
}

}  // namespace

TEST(ChainWindows, ForwardAndBackwardOrder) {
  std::vector<Vec2> y;
  for (double v : {0.0, 3.0, 4.0, 5.0, 0.0, 0.0}) y.push_back({v, -v});
  const auto ex = extract_excursions(y, 2.3, {2});
  const auto fwd = extract_windows(ex, 1, Direction::forward, 2.3);
  ASSERT_EQ(fwd.size(), 3u);
  EXPECT_DOUBLE_EQ(fwd[0][0][0], 3.0);
  EXPECT_DOUBLE_EQ(fwd[0][1][0], 4.0);
  EXPECT_DOUBLE_EQ(fwd[2][1][0], 0.0);
  const auto bwd = extract_windows(ex, 1, Direction::backward, 2.3);
  ASSERT_EQ(bwd.size(), 3u);
  EXPECT_DOUBLE_EQ(bwd[0][0][0], 3.0);
  EXPECT_DOUBLE_EQ(bwd[0][1][0], 0.0);
  EXPECT_DOUBLE_EQ(bwd[2][1][1], -4.0);
}

TEST(MmemStep, NoiseFreeIsAlphaTimesAnchor) {
  const auto p = noise_free(2, 0.7, 1.0);
  Rng rng(1);
  const std::vector<Vec2> hist{{3.0, 2.1}, {2.1, 2.1}};
  const auto s = mmem_step(hist, p, rng);
  EXPECT_NEAR(s.value[0], 2.1, 1e-12);
  EXPECT_NEAR(s.value[1], 2.1, 1e-12);
}

TEST(MmemStep, FiniteAtThresholdEdge) {
  const auto& d = full_data();
  const auto p = fit_mmem(d.excursions, 1, Direction::forward, d.u);
  Rng rng(2);
  const std::vector<Vec2> hist{{d.u + 1e-9, 0.0}};
  for (int i = 0; i < 100; ++i) {
    const auto s = mmem_step(hist, p, rng);
    EXPECT_TRUE(std::isfinite(s.value[0]) && std::isfinite(s.value[1]));
  }
  const std::vector<Vec2> below{{d.u - 0.1, 0.0}};
  EXPECT_THROW(mmem_step(below, p, rng), DomainError);
}

TEST(MmemStep, MeanMatchesBruteForce) {
  const auto& d = full_data();
  const auto p = fit_mmem(d.excursions, 2, Direction::forward, d.u);
  const std::vector<Vec2> hist{{d.u + 1.2, d.u + 0.4}, {d.u + 1.0, d.u}};
  const auto given = mmem_history_residuals(hist, p);
  const double y = hist[0][0];
  Rng rng(3), rng2(4);
  const int n = 50000;
  double s[2] = {0, 0}, q[2] = {0, 0}, b[2] = {0, 0};
  const std::size_t last = p.alpha0.size() - 2;
  for (int i = 0; i < n; ++i) {
    const auto v = mmem_step(hist, p, rng).value;
    const auto draw = kde_conditional_sample(p.residuals, given, rng2).values;
    for (int c = 0; c < 2; ++c) {
      s[c] += v[c];
      q[c] += v[c] * v[c];
      b[c] += p.alpha0[last + c] * y + std::pow(y, p.beta0[last + c]) * draw[c];
    }
  }
  for (int c = 0; c < 2; ++c) {
    const double m = s[c] / n;
    const double se = std::sqrt((q[c] / n - m * m) / n);
    EXPECT_NEAR(m, b[c] / n, 3.0 * std::sqrt(2.0) * se) << c;
  }
}

TEST(MmemStep, HistoryResidualsInvert) {
  const auto& d = full_data();
  const auto p = fit_mmem(d.excursions, 3, Direction::backward, d.u);
  const std::vector<Vec2> hist{{4.1, 3.0}, {3.7, 2.2}, {2.9, 3.3}};
  const auto eps = mmem_history_residuals(hist, p);
  EXPECT_EQ(eps.size(), 5u);
  const auto back = mmem_window_from_residuals(hist[0][0], eps, p);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(back[r][c], hist[r][c], 1e-12);
}

TEST(FitMmem, RecoversKnownOrderOne) {
  const double u = 2.0;
  const auto w = mmem1_windows(5000, 5, u);
  const auto p = fit_mmem_windows(w, 1, Direction::forward, u);
  EXPECT_EQ(p.residuals.dim(), 3u);
  EXPECT_NEAR(p.alpha0(0, 1), 0.6, 0.05);
  EXPECT_NEAR(p.alpha0(1, 0), 0.8, 0.05);
  EXPECT_NEAR(p.alpha0(1, 1), 0.5, 0.05);
  EXPECT_NEAR(p.beta0(0, 1), 0.3, 0.15);
  EXPECT_NEAR(p.beta0(1, 0), 0.2, 0.15);
  EXPECT_NEAR(p.beta0(1, 1), 0.4, 0.15);
}

TEST(FitMmem, PersistentSeriesHitsBound) {
  const double u = 2.0;
  auto w = mmem1_windows(300, 6, u);
  Rng rng(7);
  for (auto& win : w) {
    const double y = win[0][0];
    win = {{y, y}, {y, y + 1e-3 * standard_normal(rng)}};
    win[1][0] = y;
  }
  const auto p = fit_mmem_windows(w, 1, Direction::forward, u);
  EXPECT_NEAR(p.alpha0(1, 0), 1.0, 1e-3);
  EXPECT_NEAR(p.alpha0(0, 1), 1.0, 1e-3);
  EXPECT_FALSE(p.at_bound.empty());
}

TEST(FitMmem, AlphaDecaysDownTheRows) {
  const auto& d = full_data();
  const auto p = fit_mmem(d.excursions, 4, Direction::forward, d.u);
  EXPECT_EQ(p.residuals.dim(), 9u);
  for (int r = 1; r < 4; ++r) EXPECT_GT(p.alpha0(r, 0), p.alpha0(r + 1, 0)) << r;
}

TEST(FitMmem, TimeSymmetricProcessGivesMatchingDirections) {
  const auto& d = full_data();
  const auto f = fit_mmem(d.excursions, 1, Direction::forward, d.u);
  const auto b = fit_mmem(d.excursions, 1, Direction::backward, d.u);
  EXPECT_NEAR(f.alpha0(1, 0), b.alpha0(1, 0), 0.05);
  EXPECT_NEAR(f.alpha0(0, 1), b.alpha0(0, 1), 0.05);
}
