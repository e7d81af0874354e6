#include "tailchain/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tailchain/random.hpp"

namespace tailchain {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, std::span<const double> x, int& count) {
  ++count;
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x, double rel_step) {
  std::vector<double> g(x.size());
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    const double orig = xp[i];
    xp[i] = orig + h;
    const double fp = f(xp);
    xp[i] = orig - h;
    const double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const OptimizeOptions& options) {
  const std::size_t n = x0.size();
  OptimizeResult result;
  if (n == 0) {
    result.x = std::move(x0);
    result.value = safe_eval(f, result.x, result.evaluations);
    result.converged = true;
    return result;
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double step = options.initial_step * std::max(1.0, std::abs(x0[i]));
    simplex[i + 1][i] += step;
  }
  for (std::size_t i = 0; i <= n; ++i) values[i] = safe_eval(f, simplex[i], result.evaluations);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto point_at = [&](double t, std::vector<double>& out, const std::vector<double>& worst) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (worst[j] - centroid[j]);
  };

  while (result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        size = std::max(size, std::abs(simplex[i][j] - simplex[best][j]) / (1.0 + std::abs(simplex[best][j])));
    const double spread = values[worst] - values[best];
    if (size < options.xtol && (spread <= options.ftol * (1.0 + std::abs(values[best])) || !std::isfinite(spread))) {
      result.converged = std::isfinite(values[best]);
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

    point_at(-1.0, trial, simplex[worst]);
    const double fr = safe_eval(f, trial, result.evaluations);
    if (fr < values[best]) {
      point_at(-2.0, trial2, simplex[worst]);
      const double fe = safe_eval(f, trial2, result.evaluations);
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    // Contraction, outside or inside.
    const bool outside = fr < values[worst];
    point_at(outside ? -0.5 : 0.5, trial2, simplex[worst]);
    const double fc = safe_eval(f, trial2, result.evaluations);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = safe_eval(f, simplex[i], result.evaluations);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  return result;
}

OptimizeResult bfgs(const Objective& f, std::vector<double> x0, const OptimizeOptions& options, int max_iterations) {
  const std::size_t n = x0.size();
  OptimizeResult result;
  result.x = std::move(x0);
  result.value = safe_eval(f, result.x, result.evaluations);
  if (n == 0 || !std::isfinite(result.value)) {
    result.converged = n == 0;
    return result;
  }
  auto grad = numerical_gradient(f, result.x);
  result.evaluations += static_cast<int>(2 * n);
  std::vector<double> hinv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = 1.0 / std::max(1.0, std::abs(result.value));

  std::vector<double> dir(n), xn(n), s(n), y(n), hy(n);
  for (int iter = 0; iter < max_iterations; ++iter) {
    if (max_abs(grad) < options.gradient_tol) break;
    for (std::size_t i = 0; i < n; ++i) {
      dir[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) dir[i] -= hinv[i * n + j] * grad[j];
    }
    double slope = std::inner_product(dir.begin(), dir.end(), grad.begin(), 0.0);
    if (!(slope < 0.0)) {
      // Reset to steepest descent.
      std::fill(hinv.begin(), hinv.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        hinv[i * n + i] = 1.0 / std::max(1.0, std::abs(result.value));
        dir[i] = -grad[i] * hinv[i * n + i];
      }
      slope = std::inner_product(dir.begin(), dir.end(), grad.begin(), 0.0);
    }
    double t = 1.0, fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = result.x[i] + t * dir[i];
      fn = safe_eval(f, xn, result.evaluations);
      if (fn <= result.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    auto gn = numerical_gradient(f, xn);
    result.evaluations += static_cast<int>(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - result.x[i];
      y[i] = gn[i] - grad[i];
    }
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    const double improvement = result.value - fn;
    result.x = xn;
    result.value = fn;
    grad = std::move(gn);
    if (sy > 1e-14) {
      for (std::size_t i = 0; i < n; ++i) {
        hy[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) hy[i] += hinv[i * n + j] * y[j];
      }
      const double yhy = std::inner_product(y.begin(), y.end(), hy.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          hinv[i * n + j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
    }
    if (improvement <= 1e-15 * (1.0 + std::abs(fn)) && max_abs(s) < options.xtol) break;
  }
  result.gradient_norm = max_abs(grad);
  result.converged = result.gradient_norm < options.gradient_tol;
  return result;
}

OptimizeResult minimize(const Objective& f, std::vector<double> x0, const OptimizeOptions& options) {
  Rng rng(options.seed);
  OptimizeResult best = nelder_mead(f, x0, options);
  int evaluations = best.evaluations;
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<double> start = x0;
    for (double& v : start) v += options.restart_spread * standard_normal(rng);
    OptimizeResult trial = nelder_mead(f, start, options);
    evaluations += trial.evaluations;
    if (trial.value < best.value) best = std::move(trial);
  }
  // A fresh simplex at the incumbent guards against premature collapse.
  OptimizeResult again = nelder_mead(f, best.x, options);
  evaluations += again.evaluations;
  if (again.value <= best.value) {
    again.converged = again.converged || best.converged;
    best = std::move(again);
  }
  if (options.polish && !best.x.empty() && std::isfinite(best.value)) {
    OptimizeResult polished = bfgs(f, best.x, options);
    evaluations += polished.evaluations;
    if (polished.value <= best.value) {
      polished.converged = polished.converged || best.converged;
      best = std::move(polished);
    } else {
      best.gradient_norm = max_abs(numerical_gradient(f, best.x));
    }
  } else if (!best.x.empty() && std::isfinite(best.value)) {
    best.gradient_norm = max_abs(numerical_gradient(f, best.x));
  }
  best.evaluations = evaluations;
  return best;
}

}  // namespace tailchain
