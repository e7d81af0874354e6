#include "tailchain/condext.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "tailchain/error.hpp"
#include "tailchain/optimize.hpp"
#include "tailchain/parallel.hpp"
#include "tailchain/stats.hpp"

namespace tailchain {
namespace {

constexpr double kEtaBound = 30.0;
constexpr double kSigma2Floor = 1e-10;
constexpr double kBoundTol = 1e-4;
constexpr double kBandwidthFloor = 1e-12;

}  // namespace

IrregularMatrix::IrregularMatrix(int row_lo, int row_hi, int d, double fill) : row_lo_(row_lo), row_hi_(row_hi), d_(d) {
  if (row_lo > 0 || row_hi < 0 || d < 1) throw std::invalid_argument("irregular matrix must contain row 0");
  values_.assign(static_cast<std::size_t>((row_hi - row_lo + 1) * d - 1), fill);
}

std::size_t IrregularMatrix::flat_index(int i, int j) const {
  if (i < row_lo_ || i > row_hi_ || j < 0 || j >= d_) throw std::out_of_range("irregular matrix cell out of range");
  if (i == 0 && j == 0) throw std::out_of_range("irregular matrix has no (0,0) cell");
  const int full = (i - row_lo_) * d_ + j;
  const int skip = -row_lo_ * d_;  // position of (0, 0) in the full layout
  return static_cast<std::size_t>(full > skip ? full - 1 : full);
}

std::pair<int, int> IrregularMatrix::cell(std::size_t flat) const {
  if (flat >= values_.size()) throw std::out_of_range("irregular matrix flat index out of range");
  const int skip = -row_lo_ * d_;
  int full = static_cast<int>(flat);
  if (full >= skip) ++full;
  return {row_lo_ + full / d_, full % d_};
}

void HTParams::validate() const {
  if (alpha.size() != beta.size()) throw DomainError("HT parameter matrices differ in shape");
  for (double a : alpha.values())
    if (!(a >= -1.0 && a <= 1.0)) throw DomainError("HT alpha outside [-1,1]");
  for (double b : beta.values())
    if (!(b < 1.0)) throw DomainError("HT beta must be below 1");
}

ResidualSample::ResidualSample(std::size_t n, std::size_t m, std::vector<double> data, std::vector<double> bandwidth)
    : n_(n), m_(m), data_(std::move(data)), bandwidth_(std::move(bandwidth)) {
  if (data_.size() != n_ * m_) throw DataError("residual sample data does not match its shape");
  if (bandwidth_.size() != m_) throw DataError("residual sample needs one bandwidth per coordinate");
  for (double h : bandwidth_)
    if (!(h >= 0.0) || !std::isfinite(h)) throw DataError("residual bandwidths must be finite and non-negative");
}

ResidualSample ResidualSample::with_reference_bandwidth(std::size_t n, std::size_t m, std::vector<double> data) {
  if (n == 0) throw InsufficientDataError("residual sample is empty");
  std::vector<double> h(m, 0.0);
  const double factor = 1.06 * std::pow(static_cast<double>(n), -0.2);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = data[i * m + j];
    h[j] = n > 1 ? stddev(col) * factor : 0.0;
  }
  return ResidualSample(n, m, std::move(data), std::move(h));
}

std::vector<double> ResidualSample::column(std::size_t j) const {
  std::vector<double> col(n_);
  for (std::size_t i = 0; i < n_; ++i) col[i] = (*this)(i, j);
  return col;
}

std::vector<double> ResidualSample::column_means() const {
  std::vector<double> out(m_);
  for (std::size_t j = 0; j < m_; ++j) out[j] = mean(column(j));
  return out;
}

bool ResidualSample::regular() const {
  if (n_ < 30) return false;
  for (std::size_t j = 0; j < m_; ++j)
    if (!(bandwidth_[j] > 0.0) || !(stddev(column(j)) > 0.0)) return false;
  return true;
}

double kde_density(const ResidualSample& r, std::span<const double> point) {
  if (point.size() != r.dim()) throw DomainError("kde_density: point dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < r.rows(); ++i) {
    double k = 1.0;
    for (std::size_t j = 0; j < r.dim(); ++j) {
      const double h = std::max(r.bandwidth()[j], kBandwidthFloor);
      k *= normal_pdf((point[j] - r(i, j)) / h) / h;
    }
    total += k;
  }
  return total / static_cast<double>(r.rows());
}

KdeDraw kde_conditional_sample(const ResidualSample& r, std::span<const double> given, Rng& rng) {
  const std::size_t l = given.size();
  if (l >= r.dim()) throw DomainError("kde_conditional_sample: conditioning block must leave coordinates to draw");
  if (r.rows() == 0) throw DomainError("kde_conditional_sample: empty residual sample");
  KdeDraw out;
  std::size_t pick = 0;
  if (l == 0) {
    pick = uniform_index(rng, r.rows());
  } else {
    std::vector<double> inv_h(l);
    double log_norm = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      const double h = std::max(r.bandwidth()[j], kBandwidthFloor);
      inv_h[j] = 1.0 / h;
      log_norm += std::log(h);
    }
    std::vector<double> logw(r.rows());
    double top = -std::numeric_limits<double>::infinity();
    const double* row = r.data().data();
    for (std::size_t i = 0; i < r.rows(); ++i, row += r.dim()) {
      double q = 0.0;
      for (std::size_t j = 0; j < l; ++j) {
        const double z = (given[j] - row[j]) * inv_h[j];
        q += z * z;
      }
      const double s = -0.5 * q - log_norm;
      logw[i] = s;
      top = std::max(top, s);
    }
    if (top < -745.0) {
      out.fallback = true;
      pick = static_cast<std::size_t>(std::max_element(logw.begin(), logw.end()) - logw.begin());
    } else {
      double total = 0.0;
      for (double& v : logw) total += (v = std::exp(v - top));
      double target = uniform01(rng) * total;
      pick = r.rows() - 1;
      for (std::size_t i = 0; i < r.rows(); ++i) {
        target -= logw[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    }
  }
  out.values.resize(r.dim() - l);
  for (std::size_t j = l; j < r.dim(); ++j) {
    const double h = r.bandwidth()[j];
    out.values[j - l] = r(pick, j) + (h > 0.0 ? h * standard_normal(rng) : 0.0);
  }
  return out;
}

double to_natural(ParamTransform t, double eta) {
  eta = std::clamp(eta, -kEtaBound, kEtaBound);
  switch (t) {
    case ParamTransform::signed_unit: return std::tanh(eta);
    case ParamTransform::below_one: return 1.0 - (eta > 0.0 ? std::log1p(std::exp(-eta)) : -eta + std::log1p(std::exp(eta)));
    case ParamTransform::positive: return std::exp(eta);
    default: return eta;
  }
}

double to_unconstrained(ParamTransform t, double value) {
  switch (t) {
    case ParamTransform::signed_unit: return std::atanh(std::clamp(value, -1.0 + 1e-9, 1.0 - 1e-9));
    case ParamTransform::below_one: return -std::log(std::expm1(1.0 - std::min(value, 1.0 - 1e-9)));
    case ParamTransform::positive: return std::log(std::max(value, 1e-300));
    default: return value;
  }
}

namespace {

struct Moments {
  std::vector<double> mu, sigma2;
  double log_g2 = 0.0;
  bool ok = true;
};

/// Residuals z (n x m) and sum of log g2 for theta; ok = false on invalid scale.
Moments residual_moments(const ConditionalProblem& p, std::span<const double> theta, std::vector<double>* z_out) {
  Moments mo;
  mo.mu.assign(p.m, 0.0);
  mo.sigma2.assign(p.m, 0.0);
  std::vector<double> g1(p.m), g2(p.m), z(p.n * p.m);
  for (std::size_t i = 0; i < p.n; ++i) {
    p.g(theta, p.x_row(i), g1, g2);
    const auto w = p.w_row(i);
    for (std::size_t j = 0; j < p.m; ++j) {
      if (!(g2[j] > 0.0) || !std::isfinite(g2[j]) || !std::isfinite(g1[j])) {
        mo.ok = false;
        return mo;
      }
      z[i * p.m + j] = (w[j] - g1[j]) / g2[j];
      mo.log_g2 += std::log(g2[j]);
    }
  }
  const double n = static_cast<double>(p.n);
  for (std::size_t j = 0; j < p.m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) s += z[i * p.m + j];
    mo.mu[j] = s / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
      const double dz = z[i * p.m + j] - mo.mu[j];
      ss += dz * dz;
    }
    mo.sigma2[j] = ss / n;
  }
  if (z_out) *z_out = std::move(z);
  return mo;
}

void check_problem(const ConditionalProblem& p) {
  if (!p.g) throw ConfigError("conditional problem has no model function");
  if (p.x.size() != p.n * p.px || p.w.size() != p.n * p.m) throw DataError("conditional problem data shape mismatch");
  if (p.px < 1 || p.m < 1) throw DataError("conditional problem needs regressors and responses");
}

}  // namespace

double profile_nll(const ConditionalProblem& problem, std::span<const double> theta) {
  const Moments mo = residual_moments(problem, theta, nullptr);
  if (!mo.ok) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(problem.n);
  double nll = mo.log_g2;
  for (std::size_t j = 0; j < problem.m; ++j) {
    const double s2 = std::max(mo.sigma2[j], kSigma2Floor);
    nll += 0.5 * n * std::log(2.0 * std::numbers::pi * s2) + 0.5 * n * mo.sigma2[j] / s2;
  }
  return nll;
}

double conditional_nll(const ConditionalProblem& problem, std::span<const double> theta, std::span<const double> mu,
                       std::span<const double> sigma2) {
  std::vector<double> g1(problem.m), g2(problem.m);
  double nll = 0.0;
  for (std::size_t i = 0; i < problem.n; ++i) {
    problem.g(theta, problem.x_row(i), g1, g2);
    const auto w = problem.w_row(i);
    for (std::size_t j = 0; j < problem.m; ++j) {
      const double mean_ij = g1[j] + mu[j] * g2[j];
      const double var_ij = sigma2[j] * g2[j] * g2[j];
      const double r = w[j] - mean_ij;
      nll += 0.5 * std::log(2.0 * std::numbers::pi * var_ij) + 0.5 * r * r / var_ij;
    }
  }
  return nll;
}

std::vector<double> compute_residuals(const ConditionalProblem& problem, std::span<const double> theta) {
  std::vector<double> z;
  const Moments mo = residual_moments(problem, theta, &z);
  if (!mo.ok) throw DomainError("compute_residuals: model scale not positive at these parameters");
  return z;
}

ConditionalFit fit_conditional(const ConditionalProblem& problem, const FitOptions& options) {
  check_problem(problem);
  if (problem.n < 30)
    throw InsufficientDataError("fit_conditional needs at least 30 observations, got " + std::to_string(problem.n));
  for (std::size_t i = 0; i < problem.n; ++i)
    if (!(problem.x[i * problem.px] > problem.u))
      throw DataError("fit_conditional: conditioning value not above the threshold");

  const std::size_t np = problem.params.size();
  auto natural = [&](std::span<const double> eta) {
    std::vector<double> theta(np);
    for (std::size_t q = 0; q < np; ++q) theta[q] = to_natural(problem.params[q].transform, eta[q]);
    return theta;
  };
  const Objective f = [&](std::span<const double> eta) { return profile_nll(problem, natural(eta)); };
  std::vector<double> eta0(np);
  for (std::size_t q = 0; q < np; ++q) eta0[q] = to_unconstrained(problem.params[q].transform, problem.params[q].init);

  OptimizeOptions opt;
  opt.restarts = options.restarts;
  opt.seed = options.seed;
  const OptimizeResult res = minimize(f, eta0, opt);
  if (!std::isfinite(res.value) || !res.converged)
    throw FitError("conditional model fit did not converge", natural(res.x), res.gradient_norm);

  ConditionalFit fit;
  fit.theta = natural(res.x);
  fit.u = problem.u;
  fit.nll = res.value;
  fit.gradient_norm = res.gradient_norm;
  std::vector<double> z;
  const Moments mo = residual_moments(problem, fit.theta, &z);
  fit.mu = mo.mu;
  fit.sigma2 = mo.sigma2;
  for (double& s : fit.sigma2) s = std::max(s, kSigma2Floor);
  fit.residuals = ResidualSample::with_reference_bandwidth(problem.n, problem.m, std::move(z));
  for (std::size_t q = 0; q < np; ++q) {
    const double v = fit.theta[q];
    const auto t = problem.params[q].transform;
    if ((t == ParamTransform::signed_unit && std::abs(v) > 1.0 - kBoundTol) ||
        (t == ParamTransform::below_one && v > 1.0 - kBoundTol))
      fit.at_bound.push_back(q);
  }
  return fit;
}

ConditionalProblem ht_problem(std::span<const double> y, std::span<const double> w, double u) {
  if (y.size() != w.size()) throw DataError("ht_problem: conditioning and response lengths differ");
  ConditionalProblem p;
  p.n = y.size();
  p.px = 1;
  p.m = 1;
  p.x.assign(y.begin(), y.end());
  p.w.assign(w.begin(), w.end());
  p.u = u;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    sxy += y[i] * w[i];
    sxx += y[i] * y[i];
  }
  const double a0 = sxx > 0.0 ? std::clamp(sxy / sxx, -0.9, 0.9) : 0.0;
  p.params = {{"alpha", ParamTransform::signed_unit, a0}, {"beta", ParamTransform::below_one, 0.2}};
  p.g = [](std::span<const double> theta, std::span<const double> x, std::span<double> g1, std::span<double> g2) {
    g1[0] = theta[0] * x[0];
    g2[0] = std::pow(x[0], theta[1]);
  };
  return p;
}

PeakModel fit_peak_model(std::span<const Excursion> excursions, int k, double u, const PeakFitOptions& options) {
  if (k < 1) throw ConfigError("fit_peak_model: order must be at least 1");
  std::vector<const Excursion*> use;
  for (const auto& e : excursions)
    if (!e.censored && e.stores(e.i_star - (k - 1)) && e.stores(e.i_star + (k - 1))) use.push_back(&e);
  if (use.size() < options.min_excursions)
    throw InsufficientDataError("fit_peak_model needs at least " + std::to_string(options.min_excursions) +
                                " usable excursions, got " + std::to_string(use.size()));

  PeakModel pm;
  pm.k = k;
  pm.u = u;
  pm.params.alpha = IrregularMatrix::peak(k, pm.d);
  pm.params.beta = IrregularMatrix::peak(k, pm.d);
  const std::size_t entries = pm.params.alpha.size();
  const std::size_t n = use.size();
  std::vector<double> y0(n);
  for (std::size_t i = 0; i < n; ++i) y0[i] = use[i]->peak();

  std::vector<ConditionalFit> fits(entries);
  parallel_for(entries, options.threads, [&](std::size_t q) {
    const auto [lag, col] = pm.params.alpha.cell(q);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = use[i]->at(use[i]->i_star + lag)[static_cast<std::size_t>(col)];
    fits[q] = fit_conditional(ht_problem(y0, w, u), options.fit);
  });

  pm.mu.resize(entries);
  pm.sigma2.resize(entries);
  std::vector<double> joint(n * entries);
  for (std::size_t q = 0; q < entries; ++q) {
    pm.params.alpha[q] = fits[q].theta[0];
    pm.params.beta[q] = fits[q].theta[1];
    pm.mu[q] = fits[q].mu[0];
    pm.sigma2[q] = fits[q].sigma2[0];
    if (fits[q].boundary()) pm.at_bound.push_back(q);
    for (std::size_t i = 0; i < n; ++i) joint[i * entries + q] = fits[q].residuals(i, 0);
  }
  pm.residuals = ResidualSample::with_reference_bandwidth(n, entries, std::move(joint));
  return pm;
}

PeakPeriod simulate_peak(const PeakModel& pm, double y0, Rng& rng) {
  if (!(y0 > pm.u)) throw DomainError("simulate_peak: peak value must exceed the threshold");
  const KdeDraw eps = kde_conditional_sample(pm.residuals, {}, rng);
  PeakPeriod out;
  out.k = pm.k;
  out.rows.assign(static_cast<std::size_t>(2 * pm.k - 1), Vec2{0.0, 0.0});
  for (std::size_t q = 0; q < pm.params.alpha.size(); ++q) {
    const auto [lag, col] = pm.params.alpha.cell(q);
    out.rows[static_cast<std::size_t>(lag + pm.k - 1)][static_cast<std::size_t>(col)] =
        pm.params.alpha[q] * y0 + std::pow(y0, pm.params.beta[q]) * eps.values[q];
  }
  out.rows[static_cast<std::size_t>(pm.k - 1)][0] = y0;
  return out;
}

}  // namespace tailchain
