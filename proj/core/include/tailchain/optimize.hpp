#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tailchain {

using Objective = std::function<double(std::span<const double>)>;

struct OptimizeOptions {
  int restarts = 5;             ///< random restarts after the initial simplex run
  double restart_spread = 0.5;  ///< s.d. of restart perturbations (unconstrained scale)
  double initial_step = 0.25;
  double xtol = 1e-8;
  double ftol = 1e-12;
  int max_evaluations = 20000;  ///< per simplex run
  bool polish = true;           ///< quasi-Newton refinement of the best simplex point
  double gradient_tol = 1e-6;
  std::uint64_t seed = 0x7a11c4a1;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  double gradient_norm = 0.0;  ///< max-norm of the finite-difference gradient at x
  int evaluations = 0;
};

/// Central finite-difference gradient.
std::vector<double> numerical_gradient(const Objective& f, std::span<const double> x,
                                       double rel_step = 1e-5);

/// Nelder-Mead simplex from x0.
OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const OptimizeOptions& options);

/// BFGS with finite-difference gradients and backtracking line search.
OptimizeResult bfgs(const Objective& f, std::vector<double> x0, const OptimizeOptions& options,
                    int max_iterations = 200);

/// Simplex from x0 plus `restarts` randomly perturbed starts, best point
/// polished by BFGS. Non-finite objective values count as +infinity.
OptimizeResult minimize(const Objective& f, std::vector<double> x0, const OptimizeOptions& options);

}  // namespace tailchain
