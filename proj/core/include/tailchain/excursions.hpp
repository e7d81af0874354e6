#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tailchain/data.hpp"
#include "tailchain/margins.hpp"
#include "tailchain/stats.hpp"
#include "tailchain/types.hpp"

namespace tailchain {

/// A maximal run a..b of first-component exceedances of u on Laplace scale.
/// Rows lo..hi (lo <= a, hi >= b) are stored so that peak windows and chain
/// windows reaching past the run can be read; physical columns are either
/// empty or aligned with `y`.
struct Excursion {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t i_star = 0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::vector<Vec2> y;
  std::vector<double> hs, ws, theta_h, theta_w;
  bool censored = false;

  std::int64_t length() const { return b - a + 1; }
  bool stores(std::int64_t t) const { return t >= lo && t <= hi; }
  bool has_physical() const { return !hs.empty(); }
  std::size_t row(std::int64_t t) const;  ///< throws DomainError when t is not stored
  const Vec2& at(std::int64_t t) const { return y[row(t)]; }
  double peak() const { return at(i_star)[0]; }
  /// Throws DataError if the defining properties do not hold for threshold u.
  void validate(double u) const;
};

/// 2k-1 consecutive Laplace-scale rows centred on the excursion maximum.
struct PeakPeriod {
  int k = 1;
  std::vector<Vec2> rows;
  const Vec2& at(int lag) const { return rows[static_cast<std::size_t>(lag + k - 1)]; }
};

struct Partition {
  std::vector<std::int64_t> pre;   ///< a..i_star
  PeakPeriod peak;
  std::vector<std::int64_t> post;  ///< i_star..b
};

struct LaplaceSeries {
  std::vector<Vec2> y;
  std::size_t clamped = 0;  ///< observations whose probability was pulled off 0 or 1
};

/// Transforms wave height (binned by wave direction) and wind speed (binned
/// by wind direction) to Laplace scale.
LaplaceSeries to_laplace_series(const MetOceanSeries& series, const SemiParametricMarginal& hs_margin,
                                const SemiParametricMarginal& ws_margin);

struct ExtractOptions {
  int context = 6;  ///< rows stored on each side of a..b
};

std::vector<Excursion> extract_excursions(std::span<const Vec2> y, double u, const ExtractOptions& options = {});
/// As above, also attaching the physical series to every stored row.
std::vector<Excursion> extract_excursions(std::span<const Vec2> y, const MetOceanSeries& physical, double u,
                                          const ExtractOptions& options = {});

Partition partition(const Excursion& e, int k);

enum class ChiPair { HH, HW, WW };
const char* to_string(ChiPair p);
ChiPair chi_pair_from_string(const std::string& s);

struct ChiEstimate {
  double value = 0.0;
  Interval band;           ///< 95% bootstrap band
  std::size_t exceedances = 0;
};

struct BootstrapOptions {
  int n_boot = 500;
  double level = 0.95;
  std::uint64_t seed = 0x5eed;
};

/// P(second > u at t + lag | first > u at t). The band resamples runs of
/// consecutive conditioning exceedances. Needs at least 50 usable exceedances.
ChiEstimate chi_estimate(std::span<const Vec2> y, double u, int lag, ChiPair pair,
                         const BootstrapOptions& options = {});

/// HH or HW chi from excursions alone (for simulated ensembles). Times whose
/// lagged row is not stored count as non-exceedances for HH, and are skipped
/// for HW.
ChiEstimate chi_from_excursions(std::span<const Excursion> excursions, double u, int lag, ChiPair pair,
                                const BootstrapOptions& options = {});

struct SurvivalCurve {
  std::vector<int> lags;  ///< -max_lag..max_lag
  std::vector<double> prob;
  std::vector<Interval> band;
  std::size_t n_excursions = 0;
  double at(int lag) const { return prob[static_cast<std::size_t>(lag - lags.front())]; }
};

/// Fraction of excursions, with physical peak hs in [peak_lo, peak_hi], whose
/// first component stays above u from the peak up to lag tau.
SurvivalCurve survival_curve(std::span<const Excursion> excursions, double peak_lo, double peak_hi, int max_lag,
                             const BootstrapOptions& options = {});

}  // namespace tailchain
