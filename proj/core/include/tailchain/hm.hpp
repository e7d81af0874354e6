#pragma once

#include <span>
#include <vector>

#include "tailchain/excursions.hpp"
#include "tailchain/margins.hpp"
#include "tailchain/random.hpp"

namespace tailchain {

/// Physical trajectory over a..b of one historical storm.
struct StormEntry {
  double hs_max = 0.0;
  double theta_h = 0.0;  ///< wave direction at the storm maximum
  double ws = 0.0;       ///< wind speed at the storm maximum
  std::size_t peak = 0;  ///< index of the maximum within the trajectory
  std::vector<double> hs, ws_path, theta_h_path, theta_w_path;
};

using StormCatalog = std::vector<StormEntry>;

/// One entry per non-censored excursion, using its physical hs maximum.
StormCatalog build_catalog(std::span<const Excursion> excursions);

struct WindSpeedRegression {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double sigma = 0.0;
  bool degenerate = false;  ///< exact fit through two points; sigma is 0
};

/// OLS of storm-max wind speed on storm-max wave height.
WindSpeedRegression fit_windspeed_regression(std::span<const double> hs_max, std::span<const double> ws);
WindSpeedRegression fit_windspeed_regression(const StormCatalog& catalog);

double hm_dissimilarity(double hs1, double dir1, double hs2, double dir2);

/// Storm-maximum wave height model: per directional bin of the wave-height
/// marginal, a GPD for storm maxima above the bin threshold.
struct StormMaxModel {
  std::vector<double> edges;  ///< bin lower edges, then 360
  std::vector<GPDParams> tails;
  std::vector<bool> pooled;  ///< bin fell back to the pooled fit
  const GPDParams& tail(double theta) const;
};

StormMaxModel fit_storm_max(const StormCatalog& catalog, const SemiParametricMarginal& hs_margin,
                            std::size_t min_per_bin = 30);

struct HMModel {
  StormCatalog catalog;
  StormMaxModel storm_max;
  WindSpeedRegression regression;
  int n_nearest = 20;
};

HMModel fit_hm(std::span<const Excursion> excursions, const SemiParametricMarginal& hs_margin);

struct HMDraw {
  Excursion excursion;       ///< physical columns set; y filled when marginals are supplied
  std::size_t matched = 0;   ///< catalog index of the matched storm
  double hs_max = 0.0;
  double ws_max = 0.0;
};

/// Steps: resample a storm-max direction, draw the storm-max hs from that
/// sector's GPD, pick one of the n nearest historical storms uniformly, and
/// rescale and rotate its trajectory.
HMDraw hm_simulate(const HMModel& model, Rng& rng, const SemiParametricMarginal* hs_margin = nullptr,
                   const SemiParametricMarginal* ws_margin = nullptr);
/// Same with the storm-max direction and hs given.
HMDraw hm_simulate_given(const HMModel& model, double theta, double hs_max, Rng& rng,
                         const SemiParametricMarginal* hs_margin = nullptr,
                         const SemiParametricMarginal* ws_margin = nullptr);

/// Indices of the n least dissimilar catalog storms, nearest first.
std::vector<std::size_t> nearest_storms(const StormCatalog& catalog, double hs, double theta, std::size_t n);

}  // namespace tailchain
