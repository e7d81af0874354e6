#include "tailchain/evar.hpp"

#include <algorithm>
#include <cmath>

#include "tailchain/error.hpp"
#include "tailchain/parallel.hpp"

namespace tailchain {
namespace {

constexpr double kDivisorTol = 1e-8;
constexpr int kMaxRegressors = 64;

std::size_t regressors(int k, int d) { return static_cast<std::size_t>(k * d); }

}  // namespace

std::vector<double> ReparamMap::regressor_alphas() const {
  std::vector<double> a(regressors(k, d));
  for (int ip = 0; ip < k; ++ip)
    for (int j = 0; j < d; ++j) a[static_cast<std::size_t>(ip * d + j)] = (*this)(k - ip, j);
  return a;
}

void ReparamMap::validate() const {
  if (k < 1 || d < 1 || alpha_hat.size() != static_cast<std::size_t>((k + 1) * d))
    throw DomainError("reparameterization map has the wrong shape");
  for (double a : alpha_hat)
    if (!(a >= -1.0 && a <= 1.0)) throw DomainError("reparameterization coefficients must lie in [-1,1]");
  if ((*this)(k, 0) != 1.0) throw DomainError("reparameterization anchor coefficient must be 1");
  const auto a = regressor_alphas();
  for (std::size_t m = 1; m < a.size(); ++m)
    if (std::abs(a[m]) < kDivisorTol)
      throw ReparamUndefinedError("reparameterization undefined: zero coefficient at regressor " + std::to_string(m));
}

std::vector<double> phi_row(const PhiList& phi, int l) {
  const int k = static_cast<int>(phi.size());
  const int d = static_cast<int>(phi.front().cols());
  std::vector<double> c(regressors(k, d));
  for (int ip = 0; ip < k; ++ip)
    for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(ip * d + j)] = phi[static_cast<std::size_t>(k - ip - 1)](l, j);
  return c;
}

void set_phi_row(PhiList& phi, int l, std::span<const double> coef) {
  const int k = static_cast<int>(phi.size());
  const int d = static_cast<int>(phi.front().cols());
  for (int ip = 0; ip < k; ++ip)
    for (int j = 0; j < d; ++j) phi[static_cast<std::size_t>(k - ip - 1)](l, j) = coef[static_cast<std::size_t>(ip * d + j)];
}

namespace {

// Per-output maps between raw and reparameterized coefficient rows.
void row_to_tilde(std::span<const double> c, std::span<const double> a, double target, std::span<double> out) {
  out[0] = c[0] - target;
  for (std::size_t m = 1; m < c.size(); ++m) out[m] = c[m] + out[m - 1] * a[m - 1] / a[m];
}

void row_from_tilde(std::span<const double> t, std::span<const double> a, double target, std::span<double> out) {
  out[0] = target + t[0];
  for (std::size_t m = 1; m < t.size(); ++m) out[m] = t[m] - t[m - 1] * a[m - 1] / a[m];
}

PhiList map_rows(const PhiList& in, const ReparamMap& m, bool forward) {
  m.validate();
  if (static_cast<int>(in.size()) != m.k) throw DomainError("Phi list length does not match the map order");
  const auto a = m.regressor_alphas();
  PhiList out = in;
  std::vector<double> row_out(a.size());
  for (int l = 0; l < m.d; ++l) {
    const auto row_in = phi_row(in, l);
    if (forward)
      row_to_tilde(row_in, a, m(0, l), row_out);
    else
      row_from_tilde(row_in, a, m(0, l), row_out);
    set_phi_row(out, l, row_out);
  }
  return out;
}

}  // namespace

PhiList reparameterize(const PhiList& phi, const ReparamMap& m) { return map_rows(phi, m, true); }
PhiList unreparameterize(const PhiList& phi_tilde, const ReparamMap& m) { return map_rows(phi_tilde, m, false); }

bool EVARParams::b_zero() const {
  return std::all_of(B.begin(), B.end(), [](double b) { return b == 0.0; });
}

ReparamMap estimate_reparam_map(std::span<const ChainWindow> windows, int k, double u, const ChainFitOptions& options) {
  const PeakModel f = fit_chain_entries(windows, k, u, options);
  ReparamMap m;
  m.k = k;
  m.d = 2;
  m.alpha_hat.assign(static_cast<std::size_t>((k + 1) * m.d), 0.0);
  for (int i = 0; i <= k; ++i)
    for (int j = 0; j < m.d; ++j) m(i, j) = (i == k && j == 0) ? 1.0 : f.params.alpha(k - i, j);
  return m;
}

EVARParams fit_evar_windows(std::span<const ChainWindow> windows, int k, Direction dir, double u,
                            const EVAROptions& options) {
  if (k < 1) throw ConfigError("EVAR order must be at least 1");
  if (2 * k > kMaxRegressors) throw ConfigError("EVAR order too large");
  if (windows.size() < 30)
    throw InsufficientDataError("EVAR fit needs at least 30 windows, got " + std::to_string(windows.size()));
  constexpr int d = 2;
  const std::size_t n = windows.size();
  const std::size_t M = regressors(k, d);

  EVARParams p;
  p.k = k;
  p.d = d;
  p.u = u;
  p.direction = dir;
  p.raw_coordinates = options.raw_coordinates;
  if (!options.raw_coordinates) {
    try {
      ReparamMap m = estimate_reparam_map(windows, k, u, options.chain);
      m.validate();
      p.reparam = std::move(m);
    } catch (const ReparamUndefinedError&) {
      p.raw_coordinates = true;
      p.reparam_fallback = true;
    }
  }

  // Regressors: anchor, then lagged values oldest first.
  std::vector<double> x(n * (M + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const ChainWindow& w = windows[i];
    if (w.size() != static_cast<std::size_t>(k + 1)) throw DataError("EVAR window has the wrong length");
    x[i * (M + 1)] = w[0][0];
    for (int ip = 0; ip < k; ++ip)
      for (int j = 0; j < d; ++j) x[i * (M + 1) + 1 + static_cast<std::size_t>(ip * d + j)] = w[static_cast<std::size_t>(ip)][static_cast<std::size_t>(j)];
  }

  // Least-squares start with intercept.
  Eigen::MatrixXd X(n, M + 1);
  Eigen::MatrixXd Y(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (std::size_t m = 0; m < M; ++m) X(i, m + 1) = x[i * (M + 1) + 1 + m];
    for (int l = 0; l < d; ++l) Y(i, l) = windows[i][static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
  }
  const Eigen::MatrixXd ols = X.colPivHouseholderQr().solve(Y);

  p.phi.assign(static_cast<std::size_t>(k), Eigen::MatrixXd::Zero(d, d));
  p.B.assign(d, 0.0);
  p.mu.assign(d, 0.0);
  p.sigma2.assign(d, 0.0);
  std::vector<ConditionalFit> fits(d);
  const std::vector<double> a = p.reparam ? p.reparam->regressor_alphas() : std::vector<double>{};
  const bool fit_b = !options.force_B_zero;

  parallel_for(static_cast<std::size_t>(d), options.chain.threads, [&](std::size_t lu) {
    const int l = static_cast<int>(lu);
    const double target = p.reparam ? (*p.reparam)(0, l) : 0.0;
    std::vector<double> init(M);
    for (std::size_t m = 0; m < M; ++m) init[m] = ols(static_cast<Eigen::Index>(m + 1), l);
    if (p.reparam) {
      std::vector<double> t(M);
      row_to_tilde(init, a, target, t);
      init = t;
    }
    ConditionalProblem prob;
    prob.n = n;
    prob.px = M + 1;
    prob.m = 1;
    prob.x = x;
    prob.w.resize(n);
    for (std::size_t i = 0; i < n; ++i) prob.w[i] = Y(static_cast<Eigen::Index>(i), l);
    prob.u = u;
    for (std::size_t m = 0; m < M; ++m) prob.params.push_back({"phi" + std::to_string(m), ParamTransform::free, init[m]});
    if (fit_b) prob.params.push_back({"B", ParamTransform::below_one, 0.3});
    const bool tilde = p.reparam.has_value();
    prob.g = [M, tilde, fit_b, a, target](std::span<const double> theta, std::span<const double> xr,
                                          std::span<double> g1, std::span<double> g2) {
      double coef_buf[kMaxRegressors];
      std::span<const double> coef = theta.first(M);
      if (tilde) {
        row_from_tilde(coef, a, target, std::span<double>(coef_buf, M));
        coef = std::span<const double>(coef_buf, M);
      }
      double s = 0.0;
      for (std::size_t m = 0; m < M; ++m) s += coef[m] * xr[m + 1];
      g1[0] = s;
      g2[0] = fit_b ? std::pow(xr[0], theta[M]) : 1.0;
    };
    fits[lu] = fit_conditional(prob, options.chain.fit);
  });

  std::vector<double> joint(n * d);
  double nll = 0.0;
  for (int l = 0; l < d; ++l) {
    const auto& f = fits[static_cast<std::size_t>(l)];
    std::vector<double> coef(f.theta.begin(), f.theta.begin() + static_cast<std::ptrdiff_t>(M));
    if (p.reparam) {
      std::vector<double> raw(M);
      row_from_tilde(coef, a, (*p.reparam)(0, l), raw);
      coef = raw;
    }
    set_phi_row(p.phi, l, coef);
    p.B[static_cast<std::size_t>(l)] = fit_b ? f.theta[M] : 0.0;
    p.mu[static_cast<std::size_t>(l)] = f.mu[0];
    p.sigma2[static_cast<std::size_t>(l)] = f.sigma2[0];
    nll += f.nll;
    for (std::size_t i = 0; i < n; ++i) joint[i * d + static_cast<std::size_t>(l)] = f.residuals(i, 0);
  }
  p.nll = nll;
  p.residuals = ResidualSample::with_reference_bandwidth(n, d, std::move(joint));
  return p;
}

EVARParams fit_evar(std::span<const Excursion> excursions, int k, Direction dir, double u, const EVAROptions& options) {
  const auto windows = extract_windows(excursions, k, dir, u);
  return fit_evar_windows(windows, k, dir, u, options);
}

Vec2 evar_mean(std::span<const Vec2> history, const EVARParams& p) {
  if (history.size() != static_cast<std::size_t>(p.k)) throw DomainError("evar: history must hold k rows");
  Vec2 out{0.0, 0.0};
  for (int i = 1; i <= p.k; ++i) {
    const Vec2& h = history[static_cast<std::size_t>(p.k - i)];
    const Eigen::MatrixXd& P = p.phi[static_cast<std::size_t>(i - 1)];
    for (int l = 0; l < 2; ++l) out[static_cast<std::size_t>(l)] += P(l, 0) * h[0] + P(l, 1) * h[1];
  }
  return out;
}

ChainStep evar_step(std::span<const Vec2> history, const EVARParams& p, double anchor, Rng& rng) {
  if (!(anchor > p.u)) throw DomainError("evar_step: anchor must exceed the threshold");
  ChainStep out;
  out.value = evar_mean(history, p);
  const KdeDraw eps = kde_conditional_sample(p.residuals, {}, rng);
  for (std::size_t l = 0; l < 2; ++l) out.value[l] += std::pow(anchor, p.B[l]) * eps.values[l];
  out.fallback = eps.fallback;
  return out;
}

}  // namespace tailchain
