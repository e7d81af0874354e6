#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tailchain/types.hpp"

namespace tailchain {

/// Aligned 3-hourly met-ocean series: wave height (m), wind speed (m/s),
/// wave and wind directions (degrees, [0, 360)).
struct MetOceanSeries {
  std::vector<std::int64_t> t;
  std::vector<double> hs;
  std::vector<double> ws;
  std::vector<double> theta_h;
  std::vector<double> theta_w;

  std::size_t size() const { return t.size(); }
  /// Throws DataError on length mismatch, non-contiguous time, bad values.
  void validate() const;
};

MetOceanSeries read_csv(const std::filesystem::path& path);
MetOceanSeries parse_csv(std::istream& in);
void write_csv(const MetOceanSeries& series, std::ostream& out);
void write_csv(const MetOceanSeries& series, const std::filesystem::path& path);

struct GpdTail {
  double sigma = 1.0;
  double xi = 0.0;
};

/// Configuration of the synthetic stand-in for a hindcast. Index 0 refers to
/// wave height, index 1 to wind speed. Defaults give roughly 53 years of
/// 3-hourly data with North-Sea-like magnitudes.
struct SyntheticSpec {
  std::size_t n = 154866;
  std::array<double, 2> lag1_rho{0.97, 0.90};
  double cross_rho = 0.7;
  std::array<GpdTail, 2> gpd_tail{{{1.8, -0.05}, {7.0, -0.1}}};
  double dir_drift_sd = 12.0;
  std::uint64_t seed = 20240601;

  void validate() const;
  /// Correlation of the bivariate innovations that yields cross_rho between
  /// the stationary latent components.
  double innovation_correlation() const;
  /// Quantile of the configured marginal at probability p.
  double marginal_quantile(int variable, double p) const;
  /// Same quantile addressed by the exceedance probability 1 - p.
  double marginal_quantile_upper(int variable, double survival) const;
};

struct SyntheticDraw {
  MetOceanSeries series;
  std::vector<Vec2> latent;  ///< standard-normal latent AR(1) process
};

SyntheticDraw generate_synthetic_with_latent(const SyntheticSpec& spec);
MetOceanSeries generate_synthetic(const SyntheticSpec& spec);

}  // namespace tailchain
