#pragma once

#include <vector>

#include "tailchain/excursions.hpp"

namespace tailchain {

struct ResponseConfig {
  double c = 0.5;  ///< wind contribution coefficient
  double h = 6.0;  ///< wave-impact onset height (m)
  void validate() const;
};

/// The two default (c, h) pairs used by the assessment harness.
std::vector<ResponseConfig> default_response_configs();

/// Exposed cross-section of a unit cube hit from direction theta.
double exposed_area(double theta_h);
/// Wind speed component along the wave direction (signed).
double inline_wind(double ws, double theta_h, double theta_w);
double instantaneous_response(double hs, double ws, double theta_h, double theta_w, const ResponseConfig& cfg);

struct ResponseValue {
  double value = 0.0;
  bool empty = false;  ///< no time point is more than 2 steps from the peak
};

/// Maximum and sum of R over a..b excluding |i - i_star| <= 2.
ResponseValue rmax(const Excursion& e, const ResponseConfig& cfg);
ResponseValue rsum(const Excursion& e, const ResponseConfig& cfg);

}  // namespace tailchain
