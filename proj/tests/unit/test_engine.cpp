#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tailchain/engine.hpp"
#include "tailchain/error.hpp"

using namespace tailchain;

namespace {

const PreparedData& data() {
  static const PreparedData d = [] {
    SyntheticSpec spec;
    spec.n = 60000;
    return prepare_data(generate_synthetic(spec));
  }();
  return d;
}

const ExcursionModel& model(Family f) {
  static const ExcursionModel evar = [] {
    ModelOptions o;
    o.family = Family::evar;
    o.k = 2;
    return fit_excursion_model(data().excursions, data().hs_margin, data().ws_margin, data().u, o);
  }();
  static const ExcursionModel mmem = [] {
    ModelOptions o;
    o.family = Family::mmem;
    o.k = 1;
    return fit_excursion_model(data().excursions, data().hs_margin, data().ws_margin, data().u, o);
  }();
  return f == Family::evar ? evar : mmem;
}

void expect_same(const Excursion& a, const Excursion& b) {
  ASSERT_EQ(a.y.size(), b.y.size());
  EXPECT_EQ(a.i_star, b.i_star);
  for (std::size_t t = 0; t < a.y.size(); ++t) {
    EXPECT_EQ(a.y[t][0], b.y[t][0]);
    EXPECT_EQ(a.y[t][1], b.y[t][1]);
    EXPECT_EQ(a.hs[t], b.hs[t]);
    EXPECT_EQ(a.theta_w[t], b.theta_w[t]);
  }
}

}  // namespace

TEST(Family, Names) {
  for (auto f : {Family::mmem, Family::evar, Family::evar0}) EXPECT_EQ(family_from_string(to_string(f)), f);
  EXPECT_THROW(family_from_string("garch"), ConfigError);
}

TEST(ExcursionModel, OrdersMatch) {
  const auto& m = model(Family::evar);
  EXPECT_EQ(chain_order(m.forward), 2);
  EXPECT_EQ(chain_order(m.backward), 2);
  EXPECT_EQ(chain_direction(m.forward), Direction::forward);
  EXPECT_EQ(chain_direction(m.backward), Direction::backward);
  auto bad = m;
  bad.backward = model(Family::mmem).backward;
  EXPECT_THROW(bad.validate(), ConfigError);
  auto swapped = m;
  std::swap(swapped.forward, swapped.backward);
  EXPECT_THROW(swapped.validate(), ConfigError);
}

TEST(SimulateEnsemble, PeakDominanceAndTermination) {
  for (auto f : {Family::evar, Family::mmem}) {
    const auto& m = model(f);
    const auto ens = simulate_ensemble(m, 2000, 11);
    ASSERT_EQ(ens.excursions.size(), 2000u);
    for (const auto& e : ens.excursions) {
      const double peak = e.peak();
      EXPECT_GT(peak, m.u);
      for (std::int64_t t = e.a; t <= e.b; ++t) {
        EXPECT_GT(e.at(t)[0], m.u);
        EXPECT_LE(e.at(t)[0], peak);
      }
      EXPECT_LE(e.at(e.lo)[0], m.u);
      EXPECT_LE(e.at(e.hi)[0], m.u);
      EXPECT_EQ(e.lo, e.a - 1);
      EXPECT_EQ(e.hi, e.b + 1);
    }
    EXPECT_TRUE(std::isfinite(ens.rejection_rate()));
    if (m.k >= 2) EXPECT_LT(ens.rejection_rate(), 0.5);
  }
}

TEST(SimulateEnsemble, PhysicalMatchesBackTransform) {
  const auto& m = model(Family::evar);
  const auto ens = simulate_ensemble(m, 300, 12);
  for (const auto& e : ens.excursions) {
    ASSERT_TRUE(e.has_physical());
    for (std::size_t t = 0; t < e.y.size(); ++t) {
      EXPECT_NEAR(e.hs[t], m.hs_margin.from_laplace(e.y[t][0], e.theta_h[t]), 1e-9);
      EXPECT_NEAR(e.ws[t], m.ws_margin.from_laplace(e.y[t][1], e.theta_w[t]), 1e-9);
      EXPECT_GE(e.theta_h[t], 0.0);
      EXPECT_LT(e.theta_h[t], 360.0);
    }
  }
}

TEST(SimulateEnsemble, DeterministicAcrossRunsAndThreads) {
  const auto& m = model(Family::evar);
  const auto a = simulate_ensemble(m, 200, 13, 1);
  const auto b = simulate_ensemble(m, 200, 13, 1);
  const auto c = simulate_ensemble(m, 200, 13, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    expect_same(a.excursions[i], b.excursions[i]);
    expect_same(a.excursions[i], c.excursions[i]);
  }
  EXPECT_EQ(a.rejections, c.rejections);
}

TEST(SimulateEnsemble, Empty) {
  const auto ens = simulate_ensemble(model(Family::evar), 0, 14);
  EXPECT_TRUE(ens.excursions.empty());
  EXPECT_EQ(ens.rejection_rate(), 0.0);
}

TEST(SimulateExcursion, RejectionCap) {
  auto m = model(Family::evar);
  m.max_rejects = 0;
  Rng rng(15);
  EXPECT_THROW(
      {
        for (int i = 0; i < 200; ++i) simulate_excursion(m, rng);
      },
      SimulationError);
}

TEST(PrepareData, ThresholdAndExcursions) {
  const auto& d = data();
  EXPECT_NEAR(d.u, laplace_quantile(0.95), 1e-12);
  EXPECT_GT(d.excursions.size(), 100u);
  for (const auto& e : d.excursions) EXPECT_NO_THROW(e.validate(d.u));
  PrepareOptions bad;
  bad.threshold_prob = 0.3;
  EXPECT_THROW(prepare_data(generate_synthetic(SyntheticSpec{.n = 1000}), bad), ConfigError);
}
