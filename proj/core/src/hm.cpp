#include "tailchain/hm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <Eigen/Dense>

#include "tailchain/directional.hpp"
#include "tailchain/error.hpp"

namespace tailchain {

StormCatalog build_catalog(std::span<const Excursion> excursions) {
  StormCatalog out;
  for (const auto& e : excursions) {
    if (e.censored) continue;
    if (!e.has_physical()) throw DataError("storm catalog needs excursions with physical data");
    StormEntry s;
    for (std::int64_t t = e.a; t <= e.b; ++t) {
      const std::size_t r = e.row(t);
      s.hs.push_back(e.hs[r]);
      s.ws_path.push_back(e.ws[r]);
      s.theta_h_path.push_back(e.theta_h[r]);
      s.theta_w_path.push_back(e.theta_w[r]);
    }
    s.peak = static_cast<std::size_t>(std::max_element(s.hs.begin(), s.hs.end()) - s.hs.begin());
    s.hs_max = s.hs[s.peak];
    s.theta_h = s.theta_h_path[s.peak];
    s.ws = s.ws_path[s.peak];
    out.push_back(std::move(s));
  }
  return out;
}

WindSpeedRegression fit_windspeed_regression(std::span<const double> hs_max, std::span<const double> ws) {
  if (hs_max.size() != ws.size()) throw DataError("wind speed regression: input lengths differ");
  const std::size_t n = hs_max.size();
  if (n < 2) throw InsufficientDataError("wind speed regression needs at least two storms");
  const auto [lo, hi] = std::minmax_element(hs_max.begin(), hs_max.end());
  if (*lo == *hi) throw FitError("wind speed regression: constant wave heights give a degenerate design");
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    X(static_cast<Eigen::Index>(i), 1) = hs_max[i];
    y(static_cast<Eigen::Index>(i)) = ws[i];
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  WindSpeedRegression r;
  r.beta0 = beta(0);
  r.beta1 = beta(1);
  if (n == 2) {
    r.degenerate = true;
    return r;
  }
  const double rss = (y - X * beta).squaredNorm();
  r.sigma = std::sqrt(rss / static_cast<double>(n - 2));
  return r;
}

WindSpeedRegression fit_windspeed_regression(const StormCatalog& catalog) {
  if (catalog.size() < 10)
    throw InsufficientDataError("wind speed regression needs at least 10 storm maxima, got " +
                                std::to_string(catalog.size()));
  std::vector<double> h, w;
  for (const auto& s : catalog) {
    h.push_back(s.hs_max);
    w.push_back(s.ws);
  }
  return fit_windspeed_regression(h, w);
}

double hm_dissimilarity(double hs1, double dir1, double hs2, double dir2) {
  return std::abs(hs1 - hs2) + 0.1 * std::abs(circular_difference(dir1, dir2));
}

const GPDParams& StormMaxModel::tail(double theta) const {
  const auto it = std::upper_bound(edges.begin(), edges.end() - 1, theta);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - edges.begin() - 1));
  return tails[std::min(idx, tails.size() - 1)];
}

StormMaxModel fit_storm_max(const StormCatalog& catalog, const SemiParametricMarginal& hs_margin,
                            std::size_t min_per_bin) {
  const auto& bins = hs_margin.bins();
  StormMaxModel m;
  for (const auto& b : bins) m.edges.push_back(b.lo);
  m.edges.push_back(360.0);
  std::vector<std::vector<double>> excess(bins.size());
  std::vector<double> pooled;
  for (const auto& s : catalog) {
    const std::size_t b = hs_margin.bin_index(s.theta_h);
    const double x = s.hs_max - bins[b].tail.u_x;
    if (x > 0.0) {
      excess[b].push_back(x);
      pooled.push_back(x);
    }
  }
  std::optional<GPDParams> pooled_fit;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    GPDParams g;
    bool use_pooled = excess[b].size() < min_per_bin;
    if (!use_pooled) {
      try {
        g = fit_gpd(excess[b]);
      } catch (const FitError&) {
        use_pooled = true;
      }
    }
    if (use_pooled) {
      if (!pooled_fit) pooled_fit = fit_gpd(pooled);
      g = *pooled_fit;
    }
    g.u_x = bins[b].tail.u_x;
    g.zeta_u = bins[b].tail.zeta_u;
    m.tails.push_back(g);
    m.pooled.push_back(use_pooled);
  }
  return m;
}

HMModel fit_hm(std::span<const Excursion> excursions, const SemiParametricMarginal& hs_margin) {
  HMModel m;
  m.catalog = build_catalog(excursions);
  if (m.catalog.size() < static_cast<std::size_t>(m.n_nearest))
    throw ConfigError("historical matching needs at least 20 catalog storms, got " +
                      std::to_string(m.catalog.size()));
  m.storm_max = fit_storm_max(m.catalog, hs_margin);
  m.regression = fit_windspeed_regression(m.catalog);
  return m;
}

std::vector<std::size_t> nearest_storms(const StormCatalog& catalog, double hs, double theta, std::size_t n) {
  std::vector<std::size_t> idx(catalog.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> dist(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i)
    dist[i] = hm_dissimilarity(hs, theta, catalog[i].hs_max, catalog[i].theta_h);
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
  idx.resize(n);
  return idx;
}

HMDraw hm_simulate_given(const HMModel& model, double theta, double hs_max, Rng& rng,
                         const SemiParametricMarginal* hs_margin, const SemiParametricMarginal* ws_margin) {
  if (model.catalog.size() < static_cast<std::size_t>(model.n_nearest))
    throw ConfigError("historical matching needs at least 20 catalog storms");
  const auto near = nearest_storms(model.catalog, hs_max, theta, static_cast<std::size_t>(model.n_nearest));
  HMDraw out;
  out.matched = near[uniform_index(rng, near.size())];
  out.hs_max = hs_max;
  const StormEntry& s = model.catalog[out.matched];

  const double hs_scale = hs_max / s.hs_max;
  const double rotation = circular_difference(theta, s.theta_h);
  const auto& reg = model.regression;
  out.ws_max = std::max(0.0, reg.beta0 + reg.beta1 * hs_max + reg.sigma * standard_normal(rng));
  const double ws_scale = out.ws_max / std::max(s.ws, 1e-6);

  Excursion& e = out.excursion;
  const auto len = static_cast<std::int64_t>(s.hs.size());
  e.a = e.lo = 0;
  e.b = e.hi = len - 1;
  e.i_star = static_cast<std::int64_t>(s.peak);
  for (std::size_t t = 0; t < s.hs.size(); ++t) {
    e.hs.push_back(t == s.peak ? hs_max : std::min(hs_max, s.hs[t] * hs_scale));
    e.ws.push_back(s.ws_path[t] * ws_scale);
    e.theta_h.push_back(wrap_degrees(s.theta_h_path[t] + rotation));
    e.theta_w.push_back(wrap_degrees(s.theta_w_path[t] + rotation));
  }
  e.theta_h[s.peak] = wrap_degrees(theta);
  e.y.assign(s.hs.size(), Vec2{0.0, 0.0});
  if (hs_margin && ws_margin) {
    for (std::size_t t = 0; t < s.hs.size(); ++t)
      e.y[t] = {hs_margin->to_laplace(e.hs[t], e.theta_h[t]).y, ws_margin->to_laplace(e.ws[t], e.theta_w[t]).y};
  }
  return out;
}

HMDraw hm_simulate(const HMModel& model, Rng& rng, const SemiParametricMarginal* hs_margin,
                   const SemiParametricMarginal* ws_margin) {
  if (model.catalog.empty()) throw ConfigError("historical matching catalog is empty");
  const double theta = model.catalog[uniform_index(rng, model.catalog.size())].theta_h;
  const GPDParams& g = model.storm_max.tail(theta);
  const double hs_max = g.u_x + gpd_sample(g, rng);
  return hm_simulate_given(model, theta, hs_max, rng, hs_margin, ws_margin);
}

}  // namespace tailchain
