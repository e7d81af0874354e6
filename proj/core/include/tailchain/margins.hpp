#pragma once

#include <span>
#include <string>
#include <vector>

#include "tailchain/random.hpp"

namespace tailchain {

/// Generalized Pareto tail above a physical threshold u_x that is exceeded
/// with probability zeta_u. sigma and xi describe the excess distribution.
struct GPDParams {
  double sigma = 1.0;
  double xi = 0.0;
  double u_x = 0.0;
  double zeta_u = 0.05;

  /// Upper end of the excess support; +inf when xi >= 0.
  double excess_upper_bound() const;
  void validate() const;
};

/// Maximum-likelihood GPD fit to positive excesses; xi is kept in (-0.5, 1).
/// Needs at least 30 excesses.
GPDParams fit_gpd(std::span<const double> excesses);

double gpd_cdf(double excess, const GPDParams& p);
/// Excess quantile at non-exceedance probability q.
double gpd_quantile(double q, const GPDParams& p);
/// Excess quantile addressed by exceedance probability s = 1 - q.
double gpd_quantile_upper(double s, const GPDParams& p);
double gpd_log_survival(double excess, const GPDParams& p);
double gpd_sample(const GPDParams& p, Rng& rng);

enum class Variable { hs, ws };
const char* to_string(Variable v);
Variable variable_from_string(const std::string& s);

struct MarginalOptions {
  int n_bins = 8;                 ///< equal directional sectors covering [0, 360)
  double threshold_prob = 0.95;  ///< non-exceedance probability of u_x per bin
};

struct MarginalBin {
  double lo = 0.0;
  double hi = 360.0;
  std::vector<double> body;  ///< sorted sample of the bin
  GPDParams tail;
};

/// Result of mapping a physical value to Laplace scale. `clamped` is set when
/// the probability estimate hit 0 or 1 and was pulled inside [1/(2n), 1 - 1/(2n)].
struct LaplaceValue {
  double y = 0.0;
  bool clamped = false;
};

/// Empirical body (Hazen plotting positions, linear interpolation) glued to a
/// GPD tail above u_x, one model per directional sector.
class SemiParametricMarginal {
 public:
  SemiParametricMarginal() = default;
  SemiParametricMarginal(Variable variable, std::vector<MarginalBin> bins);

  static SemiParametricMarginal fit(std::span<const double> values, std::span<const double> directions,
                                    Variable variable, const MarginalOptions& options = {});

  Variable variable() const { return variable_; }
  const std::vector<MarginalBin>& bins() const { return bins_; }
  std::size_t bin_index(double theta) const;
  const MarginalBin& bin(double theta) const { return bins_[bin_index(theta)]; }

  /// Semi-parametric distribution function. Values below the smallest body
  /// observation or at/above the tail's upper end are clamped.
  LaplaceValue to_laplace(double x, double theta) const;
  double from_laplace(double y, double theta) const;
  /// Physical quantile at non-exceedance probability p.
  double quantile(double p, double theta) const;

 private:
  Variable variable_ = Variable::hs;
  std::vector<MarginalBin> bins_;
};

inline LaplaceValue to_laplace(double x, double theta, const SemiParametricMarginal& m) { return m.to_laplace(x, theta); }
inline double from_laplace(double y, double theta, const SemiParametricMarginal& m) { return m.from_laplace(y, theta); }

/// Hazen-position interpolated quantile of a sorted sample.
double hazen_quantile(std::span<const double> sorted, double p);
/// Hazen-position interpolated distribution function of a sorted sample.
double hazen_cdf(std::span<const double> sorted, double x);

}  // namespace tailchain
