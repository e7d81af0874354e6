#include "tailchain/margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailchain/error.hpp"
#include "tailchain/optimize.hpp"
#include "tailchain/stats.hpp"

namespace tailchain {
namespace {

constexpr double kXiExponential = 1e-8;
constexpr double kXiLow = -0.5;
constexpr double kXiHigh = 1.0;

double xi_from_latent(double eta) { return kXiLow + (kXiHigh - kXiLow) / (1.0 + std::exp(-eta)); }

double latent_from_xi(double xi) {
  const double r = (xi - kXiLow) / (kXiHigh - kXiLow);
  return std::log(r / (1.0 - r));
}

double gpd_nll(std::span<const double> x, double sigma, double xi) {
  const double n = static_cast<double>(x.size());
  double nll = n * std::log(sigma);
  if (std::abs(xi) < kXiExponential) {
    for (double v : x) nll += v / sigma;
    return nll;
  }
  double acc = 0.0;
  for (double v : x) {
    const double z = 1.0 + xi * v / sigma;
    if (!(z > 0.0)) return std::numeric_limits<double>::infinity();
    acc += std::log(z);
  }
  return nll + (1.0 + 1.0 / xi) * acc;
}

}  // namespace

double GPDParams::excess_upper_bound() const {
  return xi < 0.0 ? -sigma / xi : std::numeric_limits<double>::infinity();
}

void GPDParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(xi)) throw DomainError("GPD requires sigma > 0 and finite xi");
  if (!(zeta_u > 0.0 && zeta_u < 1.0)) throw DomainError("GPD exceedance probability must lie in (0,1)");
}

GPDParams fit_gpd(std::span<const double> excesses) {
  if (excesses.size() < 30)
    throw InsufficientDataError("fit_gpd needs at least 30 excesses, got " + std::to_string(excesses.size()));
  for (double v : excesses)
    if (!(v > 0.0) || !std::isfinite(v)) throw DataError("fit_gpd: excesses must be positive and finite");
  const double m = mean(excesses);
  const double v = variance(excesses);
  if (!(v > 1e-14 * m * m)) throw FitError("fit_gpd: degenerate sample (zero variance)");

  // Method-of-moments start.
  double xi0 = std::clamp(0.5 * (1.0 - m * m / v), -0.45, 0.9);
  double sigma0 = std::max(1e-6, m * (1.0 - xi0));
  const double xmax = *std::max_element(excesses.begin(), excesses.end());
  if (xi0 < 0.0 && sigma0 <= -xi0 * xmax) sigma0 = -xi0 * xmax * 1.05;

  const Objective f = [&](std::span<const double> eta) {
    return gpd_nll(excesses, std::exp(eta[0]), xi_from_latent(eta[1]));
  };
  OptimizeOptions options;
  options.restart_spread = 0.3;
  const auto result = minimize(f, {std::log(sigma0), latent_from_xi(xi0)}, options);
  if (!std::isfinite(result.value) || !result.converged)
    throw FitError("fit_gpd: optimizer did not converge", result.x, result.gradient_norm);

  GPDParams p;
  p.sigma = std::exp(result.x[0]);
  p.xi = xi_from_latent(result.x[1]);
  return p;
}

double gpd_cdf(double excess, const GPDParams& p) {
  if (excess < 0.0) throw DomainError("gpd_cdf: negative excess");
  if (excess > p.excess_upper_bound()) throw DomainError("gpd_cdf: excess beyond the upper end point");
  return -std::expm1(gpd_log_survival(excess, p));
}

double gpd_log_survival(double excess, const GPDParams& p) {
  if (std::abs(p.xi) < kXiExponential) return -excess / p.sigma;
  const double z = 1.0 + p.xi * excess / p.sigma;
  if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
  return -std::log(z) / p.xi;
}

double gpd_quantile(double q, const GPDParams& p) {
  if (!(q >= 0.0 && q < 1.0)) {
    if (q == 1.0) return p.excess_upper_bound();
    throw DomainError("gpd_quantile: probability outside [0,1]");
  }
  return gpd_quantile_upper(1.0 - q, p);
}

double gpd_quantile_upper(double s, const GPDParams& p) {
  if (!(s > 0.0 && s <= 1.0)) {
    if (s == 0.0) return p.excess_upper_bound();
    throw DomainError("gpd_quantile_upper: exceedance probability outside [0,1]");
  }
  if (std::abs(p.xi) < kXiExponential) return -p.sigma * std::log(s);
  return p.sigma / p.xi * std::expm1(-p.xi * std::log(s));
}

double gpd_sample(const GPDParams& p, Rng& rng) {
  double s = uniform01(rng);
  while (s <= 0.0) s = uniform01(rng);
  return gpd_quantile_upper(s, p);
}

const char* to_string(Variable v) { return v == Variable::hs ? "hs" : "ws"; }

Variable variable_from_string(const std::string& s) {
  if (s == "hs") return Variable::hs;
  if (s == "ws") return Variable::ws;
  throw DataError("unknown variable '" + s + "'");
}

double hazen_quantile(std::span<const double> sorted, double p) {
  const double n = static_cast<double>(sorted.size());
  const double h = std::clamp(p * n + 0.5, 1.0, n);  // 1-based position
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size());
  return sorted[lo - 1] + (h - static_cast<double>(lo)) * (sorted[hi - 1] - sorted[lo - 1]);
}

double hazen_cdf(std::span<const double> sorted, double x) {
  const double n = static_cast<double>(sorted.size());
  if (x < sorted.front()) return 0.0;
  if (x >= sorted.back()) return x == sorted.back() ? (n - 0.5) / n : 1.0;
  // Last index with sorted[i] <= x, then interpolate towards the next value.
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  const auto j = static_cast<std::size_t>(it - sorted.begin());
  const std::size_t i = j - 1;
  const double frac = sorted[j] > sorted[i] ? (x - sorted[i]) / (sorted[j] - sorted[i]) : 0.0;
  return (static_cast<double>(i) + 0.5 + frac) / n;
}

SemiParametricMarginal::SemiParametricMarginal(Variable variable, std::vector<MarginalBin> bins)
    : variable_(variable), bins_(std::move(bins)) {
  if (bins_.empty()) throw DataError("marginal needs at least one directional bin");
  double edge = 0.0;
  for (const auto& b : bins_) {
    if (b.lo != edge || !(b.hi > b.lo)) throw DataError("directional bins must partition [0,360) in order");
    if (b.body.empty() || !std::is_sorted(b.body.begin(), b.body.end()))
      throw DataError("marginal bin body must be a non-empty sorted sample");
    b.tail.validate();
    edge = b.hi;
  }
  if (edge != 360.0) throw DataError("directional bins must cover [0,360)");
}

SemiParametricMarginal SemiParametricMarginal::fit(std::span<const double> values, std::span<const double> directions,
                                                   Variable variable, const MarginalOptions& options) {
  if (values.size() != directions.size()) throw DataError("marginal fit: values and directions differ in length");
  if (options.n_bins < 1) throw ConfigError("marginal fit: n_bins must be positive");
  if (!(options.threshold_prob > 0.0 && options.threshold_prob < 1.0))
    throw ConfigError("marginal fit: threshold probability must lie in (0,1)");
  const double width = 360.0 / options.n_bins;
  std::vector<MarginalBin> bins(static_cast<std::size_t>(options.n_bins));
  for (int b = 0; b < options.n_bins; ++b) {
    bins[b].lo = b * width;
    bins[b].hi = b + 1 == options.n_bins ? 360.0 : (b + 1) * width;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto idx = static_cast<std::size_t>(std::floor(directions[i] / width));
    idx = std::min(idx, bins.size() - 1);
    bins[idx].body.push_back(values[i]);
  }
  for (auto& b : bins) {
    std::sort(b.body.begin(), b.body.end());
    if (b.body.empty()) throw InsufficientDataError("marginal fit: empty directional bin");
    b.tail.zeta_u = 1.0 - options.threshold_prob;
    b.tail.u_x = hazen_quantile(b.body, options.threshold_prob);
    std::vector<double> excesses;
    for (double v : b.body)
      if (v > b.tail.u_x) excesses.push_back(v - b.tail.u_x);
    try {
      const GPDParams g = fit_gpd(excesses);
      b.tail.sigma = g.sigma;
      b.tail.xi = g.xi;
    } catch (const InsufficientDataError& e) {
      throw InsufficientDataError(std::string("marginal fit for ") + to_string(variable) + " in sector [" +
                                  std::to_string(b.lo) + "," + std::to_string(b.hi) + "): " + e.what());
    }
  }
  return SemiParametricMarginal(variable, std::move(bins));
}

std::size_t SemiParametricMarginal::bin_index(double theta) const {
  if (!(theta >= 0.0 && theta < 360.0)) throw DomainError("direction outside [0,360)");
  const auto it = std::upper_bound(bins_.begin(), bins_.end(), theta,
                                   [](double t, const MarginalBin& b) { return t < b.hi; });
  return std::min(static_cast<std::size_t>(it - bins_.begin()), bins_.size() - 1);
}

LaplaceValue SemiParametricMarginal::to_laplace(double x, double theta) const {
  const MarginalBin& b = bin(theta);
  const double n = static_cast<double>(b.body.size());
  const double floor_p = 0.5 / n;
  LaplaceValue out;
  if (x > b.tail.u_x) {
    const double excess = x - b.tail.u_x;
    const double log_s = std::log(b.tail.zeta_u) + gpd_log_survival(excess, b.tail);
    if (!std::isfinite(log_s)) {
      out.clamped = true;
      out.y = laplace_quantile(1.0 - floor_p);
      return out;
    }
    out.y = log_s > std::log(0.5) ? std::log(2.0 * -std::expm1(log_s)) : -(std::log(2.0) + log_s);
    return out;
  }
  double p = hazen_cdf(b.body, x);
  if (p <= 0.0) {
    p = floor_p;
    out.clamped = true;
  } else if (p >= 1.0) {
    p = 1.0 - floor_p;
    out.clamped = true;
  }
  out.y = laplace_quantile(p);
  return out;
}

double SemiParametricMarginal::from_laplace(double y, double theta) const {
  const MarginalBin& b = bin(theta);
  // Exceedance probability of y on Laplace scale, kept in log form.
  const double log_s = y >= 0.0 ? std::log(0.5) - y : std::log1p(-0.5 * std::exp(y));
  if (log_s < std::log(b.tail.zeta_u)) {
    return b.tail.u_x + gpd_quantile_upper(std::exp(log_s - std::log(b.tail.zeta_u)), b.tail);
  }
  return hazen_quantile(b.body, laplace_cdf(y));
}

double SemiParametricMarginal::quantile(double p, double theta) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: probability outside (0,1)");
  return from_laplace(laplace_quantile(p), theta);
}

}  // namespace tailchain
