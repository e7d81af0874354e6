#include "tailchain/directional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "tailchain/error.hpp"
#include "tailchain/margins.hpp"
#include "tailchain/optimize.hpp"
#include "tailchain/stats.hpp"

namespace tailchain {

double wrap_degrees(double theta) {
  double r = std::fmod(theta, 360.0);
  if (r < 0.0) r += 360.0;
  return r >= 360.0 ? 0.0 : r;
}

double circular_difference(double a, double b) {
  double r = std::fmod(a - b + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  return r - 180.0;
}

double zeta(double h, const Lambda& lambda) { return std::sqrt(lambda[0] + lambda[1] * std::exp(-lambda[2] * h)); }

namespace {

double har_nll(std::span<const ChangeSegment> segments, std::span<const double> phi, const Lambda& lambda) {
  const std::size_t p = phi.size();
  double nll = 0.0;
  for (const auto& s : segments) {
    for (std::size_t t = p; t < s.delta.size(); ++t) {
      double mean = 0.0;
      for (std::size_t j = 0; j < p; ++j) mean += phi[j] * s.delta[t - 1 - j];
      const double var = lambda[0] + lambda[1] * std::exp(-lambda[2] * s.hs[t]);
      const double r = s.delta[t] - mean;
      nll += 0.5 * (std::log(2.0 * std::numbers::pi * var) + r * r / var);
    }
  }
  return nll;
}

}  // namespace

HeteroscedasticAR fit_heteroscedastic_ar(std::span<const ChangeSegment> segments, int p) {
  if (p < 0) throw ConfigError("AR order must be non-negative");
  std::size_t usable = 0;
  for (const auto& s : segments) {
    if (s.delta.size() != s.hs.size()) throw DataError("change segment lengths differ");
    if (s.delta.size() > static_cast<std::size_t>(p)) usable += s.delta.size() - static_cast<std::size_t>(p);
  }
  if (usable < 30) throw InsufficientDataError("heteroscedastic AR fit needs at least 30 usable changes");
  const auto np = static_cast<std::size_t>(p);
  const Objective f = [&](std::span<const double> x) {
    const Lambda lam{std::exp(x[np]), std::exp(x[np + 1]), std::exp(x[np + 2])};
    return har_nll(segments, x.first(np), lam);
  };
  std::vector<double> x0(np, 0.3);
  x0.insert(x0.end(), {std::log(0.5), std::log(0.5), std::log(0.3)});
  const OptimizeResult res = minimize(f, x0, OptimizeOptions{});
  if (!std::isfinite(res.value) || !res.converged)
    throw FitError("heteroscedastic AR fit did not converge", res.x, res.gradient_norm);
  HeteroscedasticAR out;
  out.phi.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(np));
  out.lambda = {std::exp(res.x[np]), std::exp(res.x[np + 1]), std::exp(res.x[np + 2])};
  out.nll = res.value;
  return out;
}

double WaveDirModel::F(double change) const {
  // Midrank of the value among the stored changes, on Hazen positions.
  const auto lo = std::lower_bound(changes.begin(), changes.end(), change);
  const auto hi = std::upper_bound(changes.begin(), changes.end(), change);
  const double n = static_cast<double>(changes.size());
  if (lo != hi) {
    const double mid = 0.5 * (static_cast<double>(lo - changes.begin()) + static_cast<double>(hi - changes.begin()));
    return mid / n;
  }
  return std::clamp(hazen_cdf(changes, change), 0.5 / n, 1.0 - 0.5 / n);
}

double WaveDirModel::F_inverse(double p) const { return hazen_quantile(changes, p); }
double WaveDirModel::probit(double change) const { return normal_quantile(F(change)); }
double WaveDirModel::from_probit(double delta) const { return F_inverse(normal_cdf(delta)); }

std::vector<ChangeSegment> wave_direction_changes(std::span<const Excursion> excursions, Direction side) {
  std::vector<ChangeSegment> out;
  const int step = side == Direction::forward ? 1 : -1;
  for (const auto& e : excursions) {
    if (!e.has_physical()) throw DataError("direction models need excursions with physical data");
    ChangeSegment s;
    const std::int64_t end = side == Direction::forward ? e.b : e.a;
    for (std::int64_t t = e.i_star; t != end; t += step) {
      s.delta.push_back(circular_difference(e.theta_h[e.row(t + step)], e.theta_h[e.row(t)]));
      s.hs.push_back(e.hs[e.row(t)]);
    }
    if (!s.delta.empty()) out.push_back(std::move(s));
  }
  return out;
}

WaveDirModel fit_wave_direction(std::span<const Excursion> excursions, Direction side, int p1) {
  auto segments = wave_direction_changes(excursions, side);
  WaveDirModel m;
  m.p1 = p1;
  for (const auto& s : segments) m.changes.insert(m.changes.end(), s.delta.begin(), s.delta.end());
  if (m.changes.size() < 100)
    throw InsufficientDataError("wave direction model needs at least 100 changes, got " +
                                std::to_string(m.changes.size()));
  std::sort(m.changes.begin(), m.changes.end());
  if (m.changes.front() == m.changes.back()) throw FitError("wave direction changes are degenerate (all equal)");
  for (auto& s : segments)
    for (double& d : s.delta) d = m.probit(d);
  const HeteroscedasticAR har = fit_heteroscedastic_ar(segments, p1);
  m.phi = har.phi;
  m.lambda = har.lambda;
  return m;
}

bool ar_stationary(std::span<const double> phi) {
  const auto p = static_cast<Eigen::Index>(phi.size());
  if (p == 0) return true;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) companion(0, j) = phi[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd ev = companion.eigenvalues();
  for (Eigen::Index i = 0; i < p; ++i)
    if (std::abs(ev(i)) >= 1.0) return false;
  return true;
}

bool WindOffsetModel::stationary() const { return ar_stationary(phi); }

WindOffsetModel fit_wind_offset(std::span<const Excursion> excursions, Direction side, int p2) {
  if (p2 < 1) throw ConfigError("wind offset AR order must be at least 1");
  const int step = side == Direction::forward ? 1 : -1;
  const auto p = static_cast<std::size_t>(p2);
  ConditionalProblem prob;
  prob.px = p + 1;
  prob.m = 1;
  prob.u = -std::numeric_limits<double>::infinity();
  for (const auto& e : excursions) {
    if (!e.has_physical()) throw DataError("direction models need excursions with physical data");
    std::vector<double> gamma;
    const std::int64_t end = (side == Direction::forward ? e.b : e.a) + step;
    for (std::int64_t t = e.i_star; t != end; t += step)
      gamma.push_back(circular_difference(e.theta_w[e.row(t)], e.theta_h[e.row(t)]));
    for (std::size_t t = p; t < gamma.size(); ++t) {
      prob.x.push_back(0.0);
      for (std::size_t j = 0; j < p; ++j) prob.x.push_back(gamma[t - 1 - j]);
      prob.w.push_back(gamma[t]);
      ++prob.n;
    }
  }
  for (std::size_t j = 0; j < p; ++j) prob.params.push_back({"phi" + std::to_string(j), ParamTransform::free, 0.3});
  prob.g = [p](std::span<const double> theta, std::span<const double> x, std::span<double> g1, std::span<double> g2) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += theta[j] * x[j + 1];
    g1[0] = s;
    g2[0] = 1.0;
  };
  const ConditionalFit fit = fit_conditional(prob);
  WindOffsetModel m;
  m.p2 = p2;
  m.phi = fit.theta;
  m.residuals = fit.residuals;
  return m;
}

DirectionWalker::DirectionWalker(const DirectionModels& models, double theta_h, double theta_w, Rng& rng)
    : models_(&models), theta_h_(wrap_degrees(theta_h)), theta_w_(wrap_degrees(theta_w)) {
  delta_hist_.resize(models.wave.phi.size());
  for (double& d : delta_hist_) d = standard_normal(rng);
  gamma_hist_.assign(models.wind.phi.size(), circular_difference(theta_w_, theta_h_));
}

void DirectionWalker::advance(double hs_now, Rng& rng) {
  const WaveDirModel& wave = models_->wave;
  double delta = zeta(hs_now, wave.lambda) * standard_normal(rng);
  for (std::size_t j = 0; j < wave.phi.size(); ++j) delta += wave.phi[j] * delta_hist_[j];
  if (!delta_hist_.empty()) {
    std::rotate(delta_hist_.rbegin(), delta_hist_.rbegin() + 1, delta_hist_.rend());
    delta_hist_[0] = delta;
  }
  theta_h_ = wrap_degrees(theta_h_ + wave.from_probit(delta));

  const WindOffsetModel& wind = models_->wind;
  double gamma = kde_conditional_sample(wind.residuals, {}, rng).values[0];
  for (std::size_t j = 0; j < wind.phi.size(); ++j) gamma += wind.phi[j] * gamma_hist_[j];
  if (!gamma_hist_.empty()) {
    std::rotate(gamma_hist_.rbegin(), gamma_hist_.rbegin() + 1, gamma_hist_.rend());
    gamma_hist_[0] = gamma;
  }
  theta_w_ = wrap_degrees(theta_h_ + gamma);
}

DirectionPaths simulate_directions(const DirectionModels& pre, const DirectionModels& post, std::span<const double> hs,
                                   std::size_t i_star, double theta_h, double theta_w, Rng& rng) {
  if (i_star >= hs.size()) throw DomainError("simulate_directions: peak index outside the path");
  DirectionPaths out;
  out.theta_h.assign(hs.size(), 0.0);
  out.theta_w.assign(hs.size(), 0.0);
  DirectionWalker fwd(post, theta_h, theta_w, rng);
  out.theta_h[i_star] = fwd.theta_h();
  out.theta_w[i_star] = fwd.theta_w();
  for (std::size_t t = i_star + 1; t < hs.size(); ++t) {
    fwd.advance(hs[t - 1], rng);
    out.theta_h[t] = fwd.theta_h();
    out.theta_w[t] = fwd.theta_w();
  }
  DirectionWalker bwd(pre, theta_h, theta_w, rng);
  for (std::size_t t = i_star; t-- > 0;) {
    bwd.advance(hs[t + 1], rng);
    out.theta_h[t] = bwd.theta_h();
    out.theta_w[t] = bwd.theta_w();
  }
  return out;
}

}  // namespace tailchain
