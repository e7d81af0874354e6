#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tailchain/condext.hpp"
#include "tailchain/data.hpp"
#include "tailchain/engine.hpp"
#include "tailchain/error.hpp"
#include "tailchain/stats.hpp"

using namespace tailchain;

namespace {

struct HtSample {
  std::vector<double> y, w;
};

HtSample ht_sample(double alpha, double beta, std::size_t n, std::uint64_t seed, double u = 2.0) {
  Rng rng(seed);
  HtSample s;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = u + std::exponential_distribution<double>{}(rng);
    s.y.push_back(y);
    s.w.push_back(alpha * y + std::pow(y, beta) * standard_normal(rng));
  }
  return s;
}

const PreparedData& storm_data() {
  static const PreparedData d = [] {
    SyntheticSpec spec;
    spec.n = 40000;
    spec.seed = 4242;
    return prepare_data(generate_synthetic(spec));
  }();
  return d;
}

}  // namespace

TEST(IrregularMatrix, PeakLayoutSkipsConditioningCell) {
  const auto m = IrregularMatrix::peak(3, 2);
  EXPECT_EQ(m.size(), 9u);
  EXPECT_THROW(m.flat_index(0, 0), std::out_of_range);
  EXPECT_THROW(m.flat_index(3, 0), std::out_of_range);
  for (std::size_t q = 0; q < m.size(); ++q) {
    const auto [i, j] = m.cell(q);
    EXPECT_FALSE(i == 0 && j == 0);
    EXPECT_EQ(m.flat_index(i, j), q);
  }
  EXPECT_EQ(m.flat_index(-2, 0), 0u);
  EXPECT_EQ(m.flat_index(0, 1), 4u);
  EXPECT_EQ(m.flat_index(1, 0), 5u);
}

TEST(IrregularMatrix, ChainLayoutSize) {
  const auto m = IrregularMatrix::chain(4, 2);
  EXPECT_EQ(m.size(), 9u);
  EXPECT_EQ(m.row_lo(), 0);
  EXPECT_EQ(m.row_hi(), 4);
}

TEST(HTParams, BoundsChecked) {
  HTParams p{IrregularMatrix::peak(2, 2, 0.5), IrregularMatrix::peak(2, 2, 0.2)};
  EXPECT_NO_THROW(p.validate());
  p.alpha(1, 1) = 1.2;
  EXPECT_THROW(p.validate(), DomainError);
  p.alpha(1, 1) = 0.5;
  p.beta(-1, 0) = 1.0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(Transforms, RoundTripAndRange) {
  for (auto t : {ParamTransform::signed_unit, ParamTransform::below_one, ParamTransform::free, ParamTransform::positive})
    for (double eta = -5.0; eta <= 5.0; eta += 0.37) EXPECT_NEAR(to_unconstrained(t, to_natural(t, eta)), eta, 1e-8);
  EXPECT_LE(std::abs(to_natural(ParamTransform::signed_unit, 100.0)), 1.0);
  EXPECT_LT(to_natural(ParamTransform::below_one, 100.0), 1.0 + 1e-15);
  EXPECT_GT(to_natural(ParamTransform::positive, -100.0), 0.0);
}

TEST(Kde, SingleKernelAtOrigin) {
  const ResidualSample r(1, 1, {0.0}, {1.0});
  const double x = 0.0;
  EXPECT_NEAR(kde_density(r, {&x, 1}), 0.3989, 1e-4);
}

TEST(Kde, IntegratesToOne) {
  Rng rng(1);
  std::vector<double> z(200);
  for (auto& v : z) v = standard_normal(rng) * 1.5 + 0.3;
  const auto r = ResidualSample::with_reference_bandwidth(200, 1, z);
  double total = 0.0;
  const double h = 0.01;
  for (double x = -15.0; x <= 15.0; x += h) total += kde_density(r, {&x, 1}) * h;
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(Kde, SymmetricSample) {
  std::vector<double> z;
  for (int i = 1; i <= 40; ++i) {
    z.push_back(0.1 * i * i);
    z.push_back(-0.1 * i * i);
  }
  const auto r = ResidualSample::with_reference_bandwidth(z.size(), 1, z);
  for (double x = 0.0; x < 50.0; x += 1.3) {
    const double mx = -x;
    const double a = kde_density(r, {&x, 1});
    EXPECT_GE(a, 0.0);
    EXPECT_NEAR(a, kde_density(r, {&mx, 1}), 1e-12);
  }
}

TEST(Kde, ReferenceBandwidthRule) {
  Rng rng(2);
  std::vector<double> z(2 * 500);
  for (auto& v : z) v = standard_normal(rng);
  const auto r = ResidualSample::with_reference_bandwidth(500, 2, z);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(r.bandwidth()[j], 1.06 * stddev(r.column(j)) * std::pow(500.0, -0.2), 1e-12);
  EXPECT_TRUE(r.regular());
}

TEST(KdeSample, UnconditionalMeanMatches) {
  Rng rng(3);
  std::vector<double> z(300 * 2);
  for (auto& v : z) v = std::exponential_distribution<double>{}(rng);
  const auto r = ResidualSample::with_reference_bandwidth(300, 2, z);
  const auto means = r.column_means();
  const int n = 100000;
  double s0 = 0, s1 = 0, q0 = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = kde_conditional_sample(r, {}, rng);
    ASSERT_EQ(d.values.size(), 2u);
    s0 += d.values[0];
    s1 += d.values[1];
    q0 += d.values[0] * d.values[0];
  }
  const double m0 = s0 / n, sd0 = std::sqrt(q0 / n - m0 * m0);
  EXPECT_NEAR(m0, means[0], 3.0 * sd0 / std::sqrt(n));
  EXPECT_NEAR(s1 / n, means[1], 3.0 * sd0 / std::sqrt(n) * 1.5);
}

TEST(KdeSample, IndependentCoordinatesIgnoreConditioning) {
  Rng rng(4);
  const std::size_t n = 400;
  std::vector<double> z(n * 2);
  for (auto& v : z) v = standard_normal(rng);
  const auto r = ResidualSample::with_reference_bandwidth(n, 2, z);
  const auto col = r.column(1);
  const double mean1 = mean(col);
  const double sd1 = std::sqrt(variance(col) + r.bandwidth()[1] * r.bandwidth()[1]);
  const int draws = 40000;
  for (double given : {-1.0, 0.0, 1.5}) {
    double s = 0, q = 0;
    for (int i = 0; i < draws; ++i) {
      const double v = kde_conditional_sample(r, {&given, 1}, rng).values[0];
      s += v;
      q += v * v;
    }
    const double m = s / draws;
    // Kernel weights concentrate on nearby rows, so the effective sample is smaller than n.
    EXPECT_NEAR(m, mean1, 0.15) << given;
    EXPECT_NEAR(std::sqrt(q / draws - m * m), sd1, 0.15) << given;
  }
}

TEST(KdeSample, TinyBandwidthReturnsStoredRemainder) {
  const ResidualSample r(3, 3, {0, 1, 2, 5, 6, 7, -3, -2, -1}, {1e-6, 1e-6, 1e-6});
  Rng rng(5);
  const std::vector<double> given{5.0};
  for (int i = 0; i < 100; ++i) {
    const auto d = kde_conditional_sample(r, given, rng);
    EXPECT_NEAR(d.values[0], 6.0, 1e-4);
    EXPECT_NEAR(d.values[1], 7.0, 1e-4);
    EXPECT_FALSE(d.fallback);
  }
}

TEST(KdeSample, UnderflowFallsBackToNearest) {
  const ResidualSample r(2, 2, {0, 1, 10, 20}, {1e-3, 1e-3});
  Rng rng(6);
  const double given = 9.0;
  const auto d = kde_conditional_sample(r, {&given, 1}, rng);
  EXPECT_TRUE(d.fallback);
  EXPECT_NEAR(d.values[0], 20.0, 0.1);
}

TEST(Conditional, SingleTermLikelihood) {
  const std::vector<double> y{3.0}, w{2.1};
  const auto p = ht_problem(y, w, 2.0);
  const std::vector<double> theta{0.7, 0.0}, mu{0.0}, s2{1.0};
  EXPECT_NEAR(conditional_nll(p, theta, mu, s2), 0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(conditional_nll(p, theta, mu, s2), 0.9189, 1e-4);
  EXPECT_NEAR(compute_residuals(p, theta)[0], 0.0, 1e-15);
}

TEST(Conditional, RecoversHeffernanTawn) {
  const auto s = ht_sample(0.7, 0.3, 5000, 7);
  const auto p = ht_problem(s.y, s.w, 2.0);
  const auto fit = fit_conditional(p);
  EXPECT_NEAR(fit.theta[0], 0.7, 0.05);
  EXPECT_NEAR(fit.theta[1], 0.3, 0.15);
  EXPECT_FALSE(fit.boundary());

  const std::vector<double> truth{0.7, 0.3}, mu{0.0}, s2{1.0};
  EXPECT_LE(fit.nll, conditional_nll(p, truth, mu, s2) + 1e-9);
  EXPECT_LE(fit.nll, profile_nll(p, truth) + 1e-9);

  const auto z = compute_residuals(p, fit.theta);
  ASSERT_EQ(z.size(), fit.residuals.data().size());
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i], fit.residuals.data()[i], 1e-12);
}

TEST(Conditional, NumericalGradientVanishesAtOptimum) {
  const auto s = ht_sample(0.5, 0.2, 3000, 8);
  const auto p = ht_problem(s.y, s.w, 2.0);
  const auto fit = fit_conditional(p);
  for (std::size_t q = 0; q < fit.theta.size(); ++q) {
    const double h = 1e-5;
    auto up = fit.theta, dn = fit.theta;
    up[q] += h;
    dn[q] -= h;
    const double g = (conditional_nll(p, up, fit.mu, fit.sigma2) - conditional_nll(p, dn, fit.mu, fit.sigma2)) / (2 * h);
    EXPECT_LT(std::abs(g), 1e-4) << "parameter " << q;
  }
}

TEST(Conditional, ComonotoneHitsBound) {
  Rng rng(9);
  std::vector<double> y(200);
  for (auto& v : y) v = 2.0 + std::exponential_distribution<double>{}(rng);
  const auto fit = fit_conditional(ht_problem(y, y, 2.0));
  EXPECT_NEAR(fit.theta[0], 1.0, 1e-4);
  EXPECT_TRUE(fit.boundary());
  EXPECT_EQ(fit.at_bound.front(), 0u);
}

TEST(Conditional, RejectsBadInput) {
  const auto s = ht_sample(0.5, 0.2, 29, 10);
  EXPECT_THROW(fit_conditional(ht_problem(s.y, s.w, 2.0)), InsufficientDataError);
  auto t = ht_sample(0.5, 0.2, 100, 11);
  t.y[3] = 1.0;
  EXPECT_THROW(fit_conditional(ht_problem(t.y, t.w, 2.0)), DataError);
}

TEST(PeakModel, ShapeAndDecay) {
  const auto d = prepare_data(generate_synthetic(SyntheticSpec{}));
  const auto pm = fit_peak_model(d.excursions, 4, d.u);
  EXPECT_EQ(pm.residuals.dim(), 13u);
  EXPECT_EQ(pm.params.alpha.size(), 13u);
  EXPECT_NO_THROW(pm.params.validate());
  for (int lag = 1; lag < 3; ++lag) {
    EXPECT_GE(pm.params.alpha(lag, 0), pm.params.alpha(lag + 1, 0)) << lag;
    EXPECT_GE(pm.params.alpha(-lag, 0), pm.params.alpha(-lag - 1, 0)) << lag;
  }
}

TEST(PeakModel, TooFewExcursionsThrows) {
  const auto& d = storm_data();
  std::span<const Excursion> few(d.excursions.data(), 30);
  EXPECT_THROW(fit_peak_model(few, 2, d.u), InsufficientDataError);
}

TEST(SimulatePeak, NoiseFreeIsAlphaTimesPeak) {
  PeakModel pm;
  pm.k = 2;
  pm.u = 1.0;
  pm.params = {IrregularMatrix::peak(2, 2, 0.6), IrregularMatrix::peak(2, 2, 0.0)};
  pm.params.alpha(1, 1) = 0.3;
  pm.mu.assign(5, 0.0);
  pm.sigma2.assign(5, 1.0);
  pm.residuals = ResidualSample(1, 5, std::vector<double>(5, 0.0), std::vector<double>(5, 0.0));
  Rng rng(12);
  const auto p = simulate_peak(pm, 4.0, rng);
  EXPECT_DOUBLE_EQ(p.at(0)[0], 4.0);
  EXPECT_NEAR(p.at(1)[1], 1.2, 1e-12);
  EXPECT_NEAR(p.at(-1)[0], 2.4, 1e-12);
}

TEST(SimulatePeak, EntryMeansMatchModel) {
  const auto& d = storm_data();
  const auto pm = fit_peak_model(d.excursions, 2, d.u);
  const double y0 = d.u + 1.0;
  const auto means = pm.residuals.column_means();
  Rng rng(13);
  const int n = 50000;
  std::vector<double> s(5, 0.0), q(5, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto p = simulate_peak(pm, y0, rng);
    EXPECT_DOUBLE_EQ(p.at(0)[0], y0);
    for (std::size_t f = 0; f < 5; ++f) {
      const auto [lag, c] = pm.params.alpha.cell(f);
      const double v = p.at(lag)[static_cast<std::size_t>(c)];
      s[f] += v;
      q[f] += v * v;
    }
  }
  for (std::size_t f = 0; f < 5; ++f) {
    const double m = s[f] / n;
    const double se = std::sqrt((q[f] / n - m * m) / n);
    const double expect = pm.params.alpha[f] * y0 + std::pow(y0, pm.params.beta[f]) * means[f];
    EXPECT_NEAR(m, expect, 3.0 * se) << "entry " << f;
  }
}
