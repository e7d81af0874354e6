#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailchain/excursions.hpp"
#include "tailchain/random.hpp"

namespace tailchain {

/// Rows row_lo..row_hi by d columns with the conditioning cell (0, 0) absent.
/// Flat storage is row-major with that cell skipped.
class IrregularMatrix {
 public:
  IrregularMatrix() = default;
  IrregularMatrix(int row_lo, int row_hi, int d, double fill = 0.0);

  /// Peak-period layout: rows -(k-1)..(k-1).
  static IrregularMatrix peak(int k, int d, double fill = 0.0) { return {-(k - 1), k - 1, d, fill}; }
  /// Chain-window layout: rows 0..k.
  static IrregularMatrix chain(int k, int d, double fill = 0.0) { return {0, k, d, fill}; }

  int row_lo() const { return row_lo_; }
  int row_hi() const { return row_hi_; }
  int cols() const { return d_; }
  std::size_t size() const { return values_.size(); }

  /// Throws std::out_of_range for cells outside the matrix and for (0, 0).
  std::size_t flat_index(int i, int j) const;
  std::pair<int, int> cell(std::size_t flat) const;
  double operator()(int i, int j) const { return values_[flat_index(i, j)]; }
  double& operator()(int i, int j) { return values_[flat_index(i, j)]; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  int row_lo_ = 0;
  int row_hi_ = 0;
  int d_ = 0;
  std::vector<double> values_;
};

struct HTParams {
  IrregularMatrix alpha;
  IrregularMatrix beta;
  /// Throws DomainError unless alpha in [-1, 1] and beta < 1 elementwise.
  void validate() const;
};

/// n residual vectors of dimension m (row-major) with per-coordinate
/// Gaussian kernel bandwidths.
class ResidualSample {
 public:
  ResidualSample() = default;
  ResidualSample(std::size_t n, std::size_t m, std::vector<double> data, std::vector<double> bandwidth);
  /// Bandwidths from the univariate normal-reference rule h_j = 1.06 s_j n^(-1/5).
  static ResidualSample with_reference_bandwidth(std::size_t n, std::size_t m, std::vector<double> data);

  std::size_t rows() const { return n_; }
  std::size_t dim() const { return m_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * m_, m_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * m_ + j]; }
  const std::vector<double>& data() const { return data_; }
  const std::vector<double>& bandwidth() const { return bandwidth_; }
  std::vector<double> column(std::size_t j) const;
  std::vector<double> column_means() const;
  /// Whether the sample meets the fitting requirements: n >= 30, positive
  /// bandwidths and non-degenerate marginals.
  bool regular() const;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> data_;
  std::vector<double> bandwidth_;
};

double kde_density(const ResidualSample& r, std::span<const double> point);

struct KdeDraw {
  std::vector<double> values;  ///< remaining coordinates given.size()..m-1
  bool fallback = false;       ///< every kernel weight underflowed; nearest component used
};

/// Draws the coordinates after the leading block `given` from the ratio of
/// the full KDE to its marginal on that block.
KdeDraw kde_conditional_sample(const ResidualSample& r, std::span<const double> given, Rng& rng);

enum class ParamTransform {
  signed_unit,  ///< [-1, 1] via tanh
  below_one,    ///< (-inf, 1) via a shifted softplus
  free,
  positive,     ///< exp
};

struct ParamSpec {
  std::string name;
  ParamTransform transform = ParamTransform::free;
  double init = 0.0;  ///< natural scale
};

double to_natural(ParamTransform t, double eta);
double to_unconstrained(ParamTransform t, double value);

/// Regression data for the working model W_j = g1_j(x) + g2_j(x) (mu_j + sigma_j Z).
/// Column 0 of x is the conditioning value and must exceed u.
struct ConditionalProblem {
  std::size_t n = 0;
  std::size_t px = 0;
  std::size_t m = 0;
  std::vector<double> x;  ///< n x px, row-major
  std::vector<double> w;  ///< n x m, row-major
  std::vector<ParamSpec> params;
  /// Writes g1 and g2 (each of length m) for one regressor row.
  std::function<void(std::span<const double> theta, std::span<const double> x_row, std::span<double> g1,
                     std::span<double> g2)>
      g;
  double u = 0.0;

  std::span<const double> x_row(std::size_t i) const { return {x.data() + i * px, px}; }
  std::span<const double> w_row(std::size_t i) const { return {w.data() + i * m, m}; }
};

struct ConditionalFit {
  std::vector<double> theta;  ///< natural scale
  std::vector<double> mu;
  std::vector<double> sigma2;
  ResidualSample residuals;
  double u = 0.0;
  double nll = 0.0;
  double gradient_norm = 0.0;
  std::vector<std::size_t> at_bound;  ///< parameters within 1e-4 of a bound
  bool boundary() const { return !at_bound.empty(); }
};

/// Profile negative log pseudo-likelihood: mu and sigma2 set to their
/// closed-form maximizers for the given theta (natural scale).
double profile_nll(const ConditionalProblem& problem, std::span<const double> theta);
/// Full negative log pseudo-likelihood at (theta, mu, sigma2).
double conditional_nll(const ConditionalProblem& problem, std::span<const double> theta, std::span<const double> mu,
                       std::span<const double> sigma2);
/// eps_ij = (w_ij - g1_j(x_i)) / g2_j(x_i), n x m row-major.
std::vector<double> compute_residuals(const ConditionalProblem& problem, std::span<const double> theta);

struct FitOptions {
  int restarts = 5;
  std::uint64_t seed = 0x7a11c4a1;
};

ConditionalFit fit_conditional(const ConditionalProblem& problem, const FitOptions& options = {});

/// Single-output HT problem W = alpha y + y^beta (mu + sigma Z) given y > u.
ConditionalProblem ht_problem(std::span<const double> y, std::span<const double> w, double u);

struct PeakModel {
  int k = 1;
  int d = 2;
  double u = 0.0;
  HTParams params;
  std::vector<double> mu;
  std::vector<double> sigma2;
  ResidualSample residuals;  ///< dimension (2k-1)d - 1, flat order of the irregular matrix
  std::vector<std::size_t> at_bound;
};

struct PeakFitOptions {
  FitOptions fit;
  unsigned threads = 1;
  std::size_t min_excursions = 50;
};

/// Per-entry HT fits of every peak-window cell on the excursion maximum.
/// Uses non-censored excursions whose peak window is stored.
PeakModel fit_peak_model(std::span<const Excursion> excursions, int k, double u, const PeakFitOptions& options = {});

PeakPeriod simulate_peak(const PeakModel& pm, double y0, Rng& rng);

}  // namespace tailchain
