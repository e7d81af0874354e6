#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tailchain/mmem.hpp"

namespace tailchain {

/// Lagged HT coefficients used to decorrelate EVAR estimators. Row 0 is the
/// predicted value Y_{t+k}, row i refers to Y_{t+k-i}, and row k is the
/// anchor row whose first entry is 1.
struct ReparamMap {
  int k = 1;
  int d = 2;
  std::vector<double> alpha_hat;  ///< (k + 1) x d, row-major

  double operator()(int i, int j) const { return alpha_hat[static_cast<std::size_t>(i * d + j)]; }
  double& operator()(int i, int j) { return alpha_hat[static_cast<std::size_t>(i * d + j)]; }
  /// Coefficient of each regressor in oldest-first order (Y_{t,1}, ..., Y_{t+k-1,d}).
  std::vector<double> regressor_alphas() const;
  /// Throws DomainError for entries outside [-1, 1] or a wrong anchor entry,
  /// ReparamUndefinedError when a divisor vanishes.
  void validate() const;
};

/// phi[i-1] is the d x d matrix Phi^(i) applied to Y_{t+k-i}; entry (l, j)
/// maps input component j to output component l.
using PhiList = std::vector<Eigen::MatrixXd>;

PhiList reparameterize(const PhiList& phi, const ReparamMap& m);
PhiList unreparameterize(const PhiList& phi_tilde, const ReparamMap& m);

/// Row l of the Phi list as a flat oldest-first regressor coefficient vector.
std::vector<double> phi_row(const PhiList& phi, int l);
void set_phi_row(PhiList& phi, int l, std::span<const double> coef);

struct EVARParams {
  int k = 1;
  int d = 2;
  double u = 0.0;
  Direction direction = Direction::forward;
  PhiList phi;
  std::vector<double> B;
  std::vector<double> mu;
  std::vector<double> sigma2;
  ResidualSample residuals;  ///< dimension d
  std::optional<ReparamMap> reparam;
  bool raw_coordinates = false;  ///< fitted without the reparameterization
  bool reparam_fallback = false;  ///< reparameterization was undefined for these data
  double nll = 0.0;

  bool b_zero() const;
};

struct EVAROptions {
  bool force_B_zero = false;
  bool raw_coordinates = false;
  ChainFitOptions chain;
};

/// Lagged HT coefficients from per-entry fits on the same windows.
ReparamMap estimate_reparam_map(std::span<const ChainWindow> windows, int k, double u, const ChainFitOptions& options);

EVARParams fit_evar(std::span<const Excursion> excursions, int k, Direction dir, double u,
                    const EVAROptions& options = {});
EVARParams fit_evar_windows(std::span<const ChainWindow> windows, int k, Direction dir, double u,
                            const EVAROptions& options = {});

/// Deterministic part sum_i Phi^(i) Y_{t+k-i}; history holds k rows, oldest first.
Vec2 evar_mean(std::span<const Vec2> history, const EVARParams& p);
/// evar_mean + y^B * eps with eps drawn from the residual KDE.
ChainStep evar_step(std::span<const Vec2> history, const EVARParams& p, double anchor, Rng& rng);

}  // namespace tailchain
