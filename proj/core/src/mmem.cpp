#include "tailchain/mmem.hpp"

#include <cmath>

#include "tailchain/error.hpp"
#include "tailchain/parallel.hpp"

namespace tailchain {

std::vector<ChainWindow> extract_windows(std::span<const Excursion> excursions, int k, Direction dir, double u) {
  if (k < 1) throw ConfigError("chain order must be at least 1");
  const int step = dir == Direction::forward ? 1 : -1;
  std::vector<ChainWindow> out;
  for (const auto& e : excursions) {
    for (std::int64_t t = e.a; t <= e.b; ++t) {
      if (!(e.at(t)[0] > u) || !e.stores(t + step * k)) continue;
      ChainWindow w(static_cast<std::size_t>(k + 1));
      for (int r = 0; r <= k; ++r) w[static_cast<std::size_t>(r)] = e.at(t + step * r);
      out.push_back(std::move(w));
    }
  }
  return out;
}

PeakModel fit_chain_entries(std::span<const ChainWindow> windows, int k, double u, const ChainFitOptions& options) {
  if (windows.size() < 30)
    throw InsufficientDataError("chain fit needs at least 30 windows, got " + std::to_string(windows.size()));
  PeakModel fit;
  fit.k = k;
  fit.u = u;
  fit.params.alpha = IrregularMatrix::chain(k, fit.d);
  fit.params.beta = IrregularMatrix::chain(k, fit.d);
  const std::size_t entries = fit.params.alpha.size();
  const std::size_t n = windows.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (windows[i].size() != static_cast<std::size_t>(k + 1)) throw DataError("chain window has the wrong length");
    y[i] = windows[i][0][0];
  }
  std::vector<ConditionalFit> fits(entries);
  parallel_for(entries, options.threads, [&](std::size_t q) {
    const auto [r, c] = fit.params.alpha.cell(q);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = windows[i][static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    fits[q] = fit_conditional(ht_problem(y, w, u), options.fit);
  });
  fit.mu.resize(entries);
  fit.sigma2.resize(entries);
  std::vector<double> joint(n * entries);
  for (std::size_t q = 0; q < entries; ++q) {
    fit.params.alpha[q] = fits[q].theta[0];
    fit.params.beta[q] = fits[q].theta[1];
    fit.mu[q] = fits[q].mu[0];
    fit.sigma2[q] = fits[q].sigma2[0];
    if (fits[q].boundary()) fit.at_bound.push_back(q);
    for (std::size_t i = 0; i < n; ++i) joint[i * entries + q] = fits[q].residuals(i, 0);
  }
  fit.residuals = ResidualSample::with_reference_bandwidth(n, entries, std::move(joint));
  return fit;
}

MMEMParams fit_mmem_windows(std::span<const ChainWindow> windows, int k, Direction dir, double u,
                            const ChainFitOptions& options) {
  PeakModel f = fit_chain_entries(windows, k, u, options);
  MMEMParams p;
  p.k = k;
  p.u = u;
  p.direction = dir;
  p.alpha0 = std::move(f.params.alpha);
  p.beta0 = std::move(f.params.beta);
  p.mu = std::move(f.mu);
  p.sigma2 = std::move(f.sigma2);
  p.residuals = std::move(f.residuals);
  p.at_bound = std::move(f.at_bound);
  return p;
}

MMEMParams fit_mmem(std::span<const Excursion> excursions, int k, Direction dir, double u,
                    const ChainFitOptions& options) {
  const auto windows = extract_windows(excursions, k, dir, u);
  return fit_mmem_windows(windows, k, dir, u, options);
}

std::vector<double> mmem_history_residuals(std::span<const Vec2> history, const MMEMParams& p) {
  if (history.size() != static_cast<std::size_t>(p.k)) throw DomainError("mmem: history must hold k rows");
  const double y = history[0][0];
  if (!(y > p.u)) throw DomainError("mmem: window start does not exceed the threshold");
  const std::size_t known = static_cast<std::size_t>(2 * p.k - 1);
  std::vector<double> eps(known);
  for (std::size_t q = 0; q < known; ++q) {
    const auto [r, c] = p.alpha0.cell(q);
    const double v = history[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    eps[q] = (v - p.alpha0[q] * y) / std::pow(y, p.beta0[q]);
  }
  return eps;
}

std::vector<Vec2> mmem_window_from_residuals(double y, std::span<const double> eps, const MMEMParams& p) {
  if (eps.size() > p.alpha0.size()) throw DomainError("mmem: too many residuals for the window");
  const std::size_t rows = eps.size() == p.alpha0.size() ? static_cast<std::size_t>(p.k + 1) : (eps.size() + 2) / 2;
  std::vector<Vec2> out(rows, Vec2{0.0, 0.0});
  out[0][0] = y;
  for (std::size_t q = 0; q < eps.size(); ++q) {
    const auto [r, c] = p.alpha0.cell(q);
    out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = p.alpha0[q] * y + std::pow(y, p.beta0[q]) * eps[q];
  }
  return out;
}

ChainStep mmem_step(std::span<const Vec2> history, const MMEMParams& p, Rng& rng) {
  const std::vector<double> given = mmem_history_residuals(history, p);
  const KdeDraw draw = kde_conditional_sample(p.residuals, given, rng);
  const double y = history[0][0];
  ChainStep out;
  out.fallback = draw.fallback;
  for (int c = 0; c < 2; ++c) {
    const std::size_t q = p.alpha0.flat_index(p.k, c);
    out.value[static_cast<std::size_t>(c)] = p.alpha0[q] * y + std::pow(y, p.beta0[q]) * draw.values[static_cast<std::size_t>(c)];
  }
  return out;
}

}  // namespace tailchain
