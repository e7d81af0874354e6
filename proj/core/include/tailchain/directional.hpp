#pragma once

#include <array>
#include <span>
#include <vector>

#include "tailchain/condext.hpp"
#include "tailchain/random.hpp"
#include "tailchain/types.hpp"

namespace tailchain {

/// Maps any angle in degrees to [0, 360).
double wrap_degrees(double theta);
/// Signed difference a - b in [-180, 180).
double circular_difference(double a, double b);

using Lambda = std::array<double, 3>;
/// Standard deviation of direction changes at wave height h (metres).
double zeta(double h, const Lambda& lambda);

/// Heteroscedastic AR(p) on the Gaussian scale:
/// delta_t = sum_j phi_j delta_{t-j} + zeta(h_t) eps_t.
struct HeteroscedasticAR {
  std::vector<double> phi;
  Lambda lambda{1.0, 1.0, 1.0};
  double nll = 0.0;
};

/// One run of consecutive changes with the wave height paired to each change.
struct ChangeSegment {
  std::vector<double> delta;
  std::vector<double> hs;
};

/// Exact Gaussian likelihood fit conditional on the first p values of each segment.
HeteroscedasticAR fit_heteroscedastic_ar(std::span<const ChangeSegment> segments, int p);

struct WaveDirModel {
  int p1 = 1;
  std::vector<double> phi;
  Lambda lambda{1.0, 1.0, 1.0};
  std::vector<double> changes;  ///< sorted observed changes (degrees); support of F_hat

  /// Empirical distribution of changes with Hazen positions and midranks.
  double F(double change) const;
  double F_inverse(double p) const;
  double probit(double change) const;
  double from_probit(double delta) const;
};

/// Changes along one side of each excursion: forward in time from the peak
/// to b (Direction::forward) or backward in time from the peak to a. Each
/// change from t is paired with the wave height at t.
std::vector<ChangeSegment> wave_direction_changes(std::span<const Excursion> excursions, Direction side);

/// Needs at least 100 changes; constant directions are rejected as degenerate.
WaveDirModel fit_wave_direction(std::span<const Excursion> excursions, Direction side, int p1 = 1);

struct WindOffsetModel {
  int p2 = 1;
  std::vector<double> phi;
  ResidualSample residuals;  ///< one-dimensional
  bool stationary() const;
};

/// Whether 1 - sum_j phi_j z^j has every root outside the unit circle.
bool ar_stationary(std::span<const double> phi);

/// AR(p2) for the wind-wave offset gamma = d(theta_w, theta_h), fitted with
/// the conditional engine (unit scale, no threshold).
WindOffsetModel fit_wind_offset(std::span<const Excursion> excursions, Direction side, int p2 = 1);

struct DirectionModels {
  WaveDirModel wave;
  WindOffsetModel wind;
};

/// Walks directions outward from the peak one step at a time.
class DirectionWalker {
 public:
  DirectionWalker(const DirectionModels& models, double theta_h, double theta_w, Rng& rng);
  double theta_h() const { return theta_h_; }
  double theta_w() const { return theta_w_; }
  /// Moves one step further from the peak; hs_now is the physical wave height
  /// at the current position.
  void advance(double hs_now, Rng& rng);

 private:
  const DirectionModels* models_;
  double theta_h_;
  double theta_w_;
  std::vector<double> delta_hist_;  ///< most recent first
  std::vector<double> gamma_hist_;
};

struct DirectionPaths {
  std::vector<double> theta_h;
  std::vector<double> theta_w;
};

/// Directions for a physical wave-height path with the peak at index i_star.
DirectionPaths simulate_directions(const DirectionModels& pre, const DirectionModels& post, std::span<const double> hs,
                                   std::size_t i_star, double theta_h, double theta_w, Rng& rng);

}  // namespace tailchain
