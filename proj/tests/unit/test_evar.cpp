#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tailchain/error.hpp"
#include "tailchain/evar.hpp"
#include "tailchain/stats.hpp"

using namespace tailchain;

namespace {

Eigen::MatrixXd mat(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

// Windows of an EVAR(1) with Gaussian residuals. The second anchor component
// follows a conditional-extremes law so the regressors are collinear, as in
// real excursions.
std::vector<ChainWindow> evar1_windows(const Eigen::MatrixXd& phi, Vec2 B, std::size_t n, std::uint64_t seed,
                                       double u = 2.0) {
  Rng rng(seed);
  std::vector<ChainWindow> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = u + std::exponential_distribution<double>{}(rng);
    const double w = 0.6 * y + std::pow(y, 0.3) * standard_normal(rng);
    Vec2 next{};
    for (int l = 0; l < 2; ++l)
      next[l] = phi(l, 0) * y + phi(l, 1) * w + std::pow(y, B[l]) * standard_normal(rng);
    out.push_back({{y, w}, next});
  }
  return out;
}

EVARParams fixed_params(int k, PhiList phi, std::vector<double> B) {
  EVARParams p;
  p.k = k;
  p.d = 2;
  p.u = 1.0;
  p.phi = std::move(phi);
  p.B = std::move(B);
  p.mu.assign(2, 0.0);
  p.sigma2.assign(2, 1.0);
  p.residuals = ResidualSample(1, 2, {0.0, 0.0}, {0.0, 0.0});
  return p;
}

ReparamMap random_map(int k, Rng& rng) {
  ReparamMap m;
  m.k = k;
  m.d = 2;
  m.alpha_hat.resize(static_cast<std::size_t>((k + 1) * 2));
  for (auto& a : m.alpha_hat) {
    const double s = uniform01(rng) < 0.2 ? -1.0 : 1.0;
    a = s * (0.1 + 0.9 * uniform01(rng));
  }
  m(k, 0) = 1.0;
  return m;
}

PhiList random_phi(int k, Rng& rng) {
  PhiList phi;
  for (int i = 0; i < k; ++i) {
    Eigen::MatrixXd m(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m(r, c) = 2.0 * uniform01(rng) - 1.0;
    phi.push_back(m);
  }
  return phi;
}

}  // namespace

TEST(EvarStep, TableFourArithmetic) {
  const auto p = fixed_params(1, {mat(0.75, 0.08, 0.10, 0.65)}, {0.43, 0.39});
  Rng rng(1);
  const std::vector<Vec2> hist{{3.0, 3.0}};
  const auto s = evar_step(hist, p, 3.0, rng);
  EXPECT_NEAR(s.value[0], 2.49, 1e-12);
  EXPECT_NEAR(s.value[1], 2.25, 1e-12);
}

TEST(EvarStep, ZeroMatricesGiveZero) {
  const auto p = fixed_params(2, {mat(0, 0, 0, 0), mat(0, 0, 0, 0)}, {0.0, 0.0});
  Rng rng(2);
  const std::vector<Vec2> hist{{3.0, 1.0}, {2.5, 0.5}};
  const auto s = evar_step(hist, p, 3.0, rng);
  EXPECT_DOUBLE_EQ(s.value[0], 0.0);
  EXPECT_DOUBLE_EQ(s.value[1], 0.0);
}

TEST(EvarStep, AffineWhenBIsZero) {
  Rng rng(3);
  const auto p = fixed_params(2, random_phi(2, rng), {0.0, 0.0});
  const std::vector<Vec2> h1{{1.0, 2.0}, {-0.5, 3.0}}, h2{{0.3, -1.0}, {2.0, 0.25}}, zero{{0, 0}, {0, 0}};
  std::vector<Vec2> sum(2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) sum[r][c] = h1[r][c] + h2[r][c];
  const auto a = evar_mean(sum, p), b = evar_mean(zero, p), c = evar_mean(h1, p), d = evar_mean(h2, p);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(a[j] + b[j], c[j] + d[j], 1e-12);
}

TEST(EvarStep, EnsembleMeanMatchesModel) {
  const double u = 2.0;
  const auto p = fit_evar_windows(evar1_windows(mat(0.7, 0.1, 0.1, 0.6), {0.4, 0.3}, 2000, 4), 1, Direction::forward, u);
  const std::vector<Vec2> hist{{3.5, 2.0}};
  const double y = hist[0][0];
  const auto mean_eps = p.residuals.column_means();
  const auto det = evar_mean(hist, p);
  Rng rng(5);
  const int n = 50000;
  double s[2] = {0, 0}, q[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    const auto v = evar_step(hist, p, y, rng).value;
    for (int c = 0; c < 2; ++c) {
      s[c] += v[c];
      q[c] += v[c] * v[c];
    }
  }
  for (int c = 0; c < 2; ++c) {
    const double m = s[c] / n;
    const double se = std::sqrt((q[c] / n - m * m) / n);
    EXPECT_NEAR(m, det[c] + std::pow(y, p.B[c]) * mean_eps[c], 3.0 * se) << c;
  }
}

TEST(Reparam, RoundTripIsIdentity) {
  Rng rng(6);
  for (int rep = 0; rep < 300; ++rep) {
    const int k = 1 + rep % 3;
    const auto m = random_map(k, rng);
    const auto phi = random_phi(k, rng);
    const auto back = unreparameterize(reparameterize(phi, m), m);
    for (int i = 0; i < k; ++i) EXPECT_LT((back[i] - phi[i]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reparam, ScalarOrderOneIsShift) {
  ReparamMap m;
  m.k = 1;
  m.d = 1;
  m.alpha_hat = {0.8, 1.0};
  PhiList phi{Eigen::MatrixXd::Constant(1, 1, 0.95)};
  const auto t = reparameterize(phi, m);
  EXPECT_NEAR(t[0](0, 0), 0.95 - 0.8, 1e-15);
}

TEST(Reparam, CollinearityIdentityZeroesTerminalEntry) {
  Rng rng(7);
  for (int k = 1; k <= 3; ++k) {
    const auto m = random_map(k, rng);
    auto phi = random_phi(k, rng);
    const auto a = m.regressor_alphas();
    for (int l = 0; l < 2; ++l) {
      auto c = phi_row(phi, l);
      double partial = 0.0;
      for (std::size_t q = 0; q + 1 < c.size(); ++q) partial += c[q] * a[q];
      c.back() = (m(0, l) - partial) / a.back();
      set_phi_row(phi, l, c);
    }
    const auto t = reparameterize(phi, m);
    for (int l = 0; l < 2; ++l) EXPECT_NEAR(phi_row(t, l).back(), 0.0, 1e-12) << "k=" << k << " l=" << l;
  }
}

TEST(Reparam, ZeroDivisorIsUndefined) {
  Rng rng(8);
  auto m = random_map(2, rng);
  m(1, 1) = 0.0;
  EXPECT_THROW(m.validate(), ReparamUndefinedError);
  EXPECT_THROW(reparameterize(random_phi(2, rng), m), ReparamUndefinedError);
}

TEST(FitEvar, RecoversOrderOne) {
  const Eigen::MatrixXd truth = mat(0.7, 0.1, 0.1, 0.6);
  const auto w = evar1_windows(truth, {0.4, 0.3}, 5000, 9);
  const auto p = fit_evar_windows(w, 1, Direction::forward, 2.0);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(p.phi[0](r, c), truth(r, c), 0.05) << r << c;
  EXPECT_NEAR(p.B[0], 0.4, 0.15);
  EXPECT_NEAR(p.B[1], 0.3, 0.15);
  EXPECT_EQ(p.residuals.dim(), 2u);
  EXPECT_FALSE(p.raw_coordinates);
  ASSERT_TRUE(p.reparam.has_value());
}

TEST(FitEvar, ForcedZeroB) {
  const auto w = evar1_windows(mat(0.7, 0.1, 0.1, 0.6), {0.4, 0.3}, 1000, 10);
  EVAROptions o;
  o.force_B_zero = true;
  const auto p = fit_evar_windows(w, 1, Direction::forward, 2.0, o);
  EXPECT_TRUE(p.b_zero());
  EXPECT_EQ(p.B[0], 0.0);
  EXPECT_EQ(p.B[1], 0.0);
}

TEST(FitEvar, SameOptimumInEitherCoordinates) {
  const auto w = evar1_windows(mat(0.7, 0.1, 0.1, 0.6), {0.4, 0.3}, 2000, 11);
  const auto a = fit_evar_windows(w, 1, Direction::forward, 2.0);
  EVAROptions o;
  o.raw_coordinates = true;
  const auto b = fit_evar_windows(w, 1, Direction::forward, 2.0, o);
  EXPECT_TRUE(b.raw_coordinates);
  EXPECT_NEAR(a.nll, b.nll, 1e-6);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(a.phi[0](r, c), b.phi[0](r, c), 1e-3);
}

TEST(FitEvar, ReparameterizationDecorrelatesCollinearPair) {
  // EVAR(2) whose lagged wave-height regressors are nearly collinear.
  const Eigen::MatrixXd phi1 = mat(0.6, 0.1, 0.1, 0.5), phi2 = mat(0.3, 0.0, 0.0, 0.2);
  Rng gen(12);
  std::vector<ChainWindow> w;
  for (int i = 0; i < 1200; ++i) {
    const double y = 2.0 + std::exponential_distribution<double>{}(gen);
    const Vec2 r0{y, 0.7 * y + std::pow(y, 0.3) * standard_normal(gen)};
    const Vec2 r1{0.95 * y + std::pow(y, 0.4) * 0.2 * standard_normal(gen),
                  0.65 * y + std::pow(y, 0.3) * standard_normal(gen)};
    Vec2 r2{};
    for (int l = 0; l < 2; ++l)
      r2[l] = phi1(l, 0) * r1[0] + phi1(l, 1) * r1[1] + phi2(l, 0) * r0[0] + phi2(l, 1) * r0[1] +
              std::pow(y, 0.3) * standard_normal(gen);
    w.push_back({r0, r1, r2});
  }
  EVAROptions o;
  o.force_B_zero = true;
  const auto base = fit_evar_windows(w, 2, Direction::forward, 2.0, o);
  ASSERT_TRUE(base.reparam.has_value());
  Rng rng(13);
  // Coefficients on Y_{t,1} (anchor) and Y_{t+1,1}, oldest-first positions 0 and 2.
  std::vector<double> r0, r2, t0, t2;
  for (int b = 0; b < 25; ++b) {
    std::vector<ChainWindow> boot(w.size());
    for (auto& x : boot) x = w[uniform_index(rng, w.size())];
    const auto f = fit_evar_windows(boot, 2, Direction::forward, 2.0, o);
    const auto r = phi_row(f.phi, 0);
    const auto t = phi_row(reparameterize(f.phi, *base.reparam), 0);
    r0.push_back(r[0]);
    r2.push_back(r[2]);
    t0.push_back(t[0]);
    t2.push_back(t[2]);
  }
  const double raw = correlation(r0, r2), tilde = correlation(t0, t2);
  EXPECT_LT(raw, -0.8);
  EXPECT_LT(std::abs(tilde), std::abs(raw));
}
