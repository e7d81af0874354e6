#include <gtest/gtest.h>

#include "tailchain/serialize.hpp"

using namespace tailchain;

namespace {

const PreparedData& data() {
  static const PreparedData d = [] {
    SyntheticSpec spec;
    spec.n = 40000;
    return prepare_data(generate_synthetic(spec));
  }();
  return d;
}

template <class T>
T through_text(const T& value) {
  const json j = value;
  return json::parse(j.dump()).get<T>();
}

}  // namespace

TEST(Serialize, ExcursionModelRoundTrip) {
  for (auto f : {Family::evar, Family::mmem, Family::evar0}) {
    ModelOptions o;
    o.family = f;
    o.k = 2;
    const auto& d = data();
    const auto m = fit_excursion_model(d.excursions, d.hs_margin, d.ws_margin, d.u, o);
    const auto back = through_text(m);
    EXPECT_EQ(json(back), json(m)) << to_string(f);
    const auto a = simulate_ensemble(m, 50, 3), b = simulate_ensemble(back, 50, 3);
    for (std::size_t i = 0; i < 50; ++i) {
      ASSERT_EQ(a.excursions[i].y.size(), b.excursions[i].y.size());
      for (std::size_t t = 0; t < a.excursions[i].y.size(); ++t) {
        EXPECT_EQ(a.excursions[i].y[t][0], b.excursions[i].y[t][0]);
        EXPECT_EQ(a.excursions[i].hs[t], b.excursions[i].hs[t]);
      }
    }
  }
}

TEST(Serialize, HmModelRoundTrip) {
  const auto m = fit_hm(data().excursions, data().hs_margin);
  const auto back = through_text(m);
  EXPECT_EQ(json(back), json(m));
  Rng r1(4), r2(4);
  const auto a = hm_simulate(m, r1), b = hm_simulate(back, r2);
  EXPECT_EQ(a.matched, b.matched);
  EXPECT_EQ(a.excursion.hs, b.excursion.hs);
}

TEST(Serialize, SmallTypes) {
  const Excursion& e = data().excursions.front();
  const auto e2 = through_text(e);
  EXPECT_EQ(e2.a, e.a);
  EXPECT_EQ(e2.i_star, e.i_star);
  EXPECT_EQ(e2.hs, e.hs);
  EXPECT_EQ(json(e2), json(e));

  SyntheticSpec s;
  s.n = 1234;
  s.seed = 99;
  s.cross_rho = 0.4;
  const auto s2 = through_text(s);
  EXPECT_EQ(s2.n, 1234u);
  EXPECT_EQ(s2.seed, 99u);
  EXPECT_EQ(s2.cross_rho, 0.4);

  const auto c = through_text(ResponseConfig{0.25, 7.5});
  EXPECT_EQ(c.c, 0.25);
  EXPECT_EQ(c.h, 7.5);

  const auto mg = through_text(data().hs_margin);
  for (double x : {1.0, 3.0, 8.0}) EXPECT_EQ(mg.to_laplace(x, 100.0).y, data().hs_margin.to_laplace(x, 100.0).y);
}

TEST(Serialize, RejectsUnknownChainType) {
  json j = {{"type", "garch"}};
  ChainModel c;
  EXPECT_THROW(from_json(j, c), ConfigError);
}

TEST(Serialize, CvReport) {
  CVReport r;
  r.n_partitions = 2;
  r.seed = 5;
  CVRow row;
  row.model = "evar(1)";
  row.family = "evar";
  row.order = 1;
  row.values = {0.1, 0.2};
  row.mean_D = 0.15;
  row.interval = {0.11, 0.19};
  row.failed = {};
  r.rows.push_back(row);
  const json j = r;
  ASSERT_EQ(j.at("rows").size(), 1u);
  EXPECT_EQ(j.at("rows")[0].at("family"), "evar");
  EXPECT_EQ(j.at("seed"), 5);
}
