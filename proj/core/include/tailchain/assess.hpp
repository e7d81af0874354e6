#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tailchain/engine.hpp"
#include "tailchain/error.hpp"
#include "tailchain/parallel.hpp"
#include "tailchain/random.hpp"
#include "tailchain/response.hpp"
#include "tailchain/stats.hpp"

namespace tailchain {

/// 20 equally spaced probabilities from 0.97 to 0.999.
std::array<double, 20> percentile_grid();

/// Mean absolute relative error of model quantiles against empirical
/// quantiles over the grid.
double distance_D(std::span<const double> model_sample, std::span<const double> empirical_sample);
double distance_D(std::span<const double> model_sample, std::span<const double> empirical_sample,
                  std::span<const double> grid);

/// Draws n excursions with physical columns from a fitted model.
using Sampler = std::function<std::vector<Excursion>(std::size_t n, std::uint64_t seed)>;

struct ModelSpec {
  std::string name;
  std::string family;
  int order = 0;
  std::function<Sampler(std::span<const Excursion> train, std::uint64_t seed)> fit;
};

/// Chain model of the given family and order on fixed margins and threshold.
ModelSpec chain_model_spec(Family family, int k, const SemiParametricMarginal& hs_margin,
                           const SemiParametricMarginal& ws_margin, double u, ModelOptions options = {});
ModelSpec hm_model_spec(const SemiParametricMarginal& hs_margin, const SemiParametricMarginal& ws_margin);

enum class Statistic { rmax, rsum };
const char* to_string(Statistic s);

struct CVOptions {
  int n_partitions = 50;
  double train_frac = 0.25;
  std::size_t ensemble_size = 20000;
  std::vector<ResponseConfig> responses = default_response_configs();
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t min_excursions = 200;
};

struct CVRow {
  std::string model;
  std::string family;
  int order = 0;
  std::size_t response = 0;  ///< index into CVOptions::responses
  Statistic statistic = Statistic::rmax;
  double mean_D = 0.0;
  Interval interval;               ///< central 80% range over partitions
  std::vector<double> values;      ///< D per successful partition
  std::vector<int> failed;         ///< partitions skipped for this model
  std::vector<std::string> errors;
};

struct CVReport {
  std::vector<CVRow> rows;
  int n_partitions = 0;
  double train_frac = 0.0;
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
};

/// Permutation of 0..n-1 drawn from stream p; the first round(train_frac n)
/// entries form the training set.
std::vector<std::size_t> partition_indices(std::size_t n, std::uint64_t seed, int p);

CVReport cross_validate(std::span<const Excursion> excursions, std::span<const ModelSpec> models,
                        const CVOptions& options);

struct BootstrapCI {
  std::vector<double> estimate;
  std::vector<Interval> intervals;
  std::vector<std::vector<double>> replicates;  ///< per successful replicate
  std::size_t failures = 0;
};

/// Percentile intervals from refitting on units resampled with replacement.
/// fit(sample, replicate_index) returns the parameter vector. More than 10%
/// failed replicates is an error.
template <class Unit, class Fit>
BootstrapCI bootstrap_ci(Fit&& fit, std::span<const Unit> units, int n_boot = 200, double level = 0.90,
                         std::uint64_t seed = 0xb007, unsigned threads = 1) {
  BootstrapCI out;
  out.estimate = fit(units, -1);
  std::vector<std::vector<double>> reps(static_cast<std::size_t>(n_boot));
  std::vector<char> ok(static_cast<std::size_t>(n_boot), 0);
  parallel_for(static_cast<std::size_t>(n_boot), threads, [&](std::size_t r) {
    Rng rng = make_stream(seed, r);
    std::vector<Unit> sample;
    sample.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) sample.push_back(units[uniform_index(rng, units.size())]);
    try {
      reps[r] = fit(std::span<const Unit>(sample), static_cast<int>(r));
      ok[r] = 1;
    } catch (const Error&) {
      ok[r] = 0;
    }
  });
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (ok[r])
      out.replicates.push_back(std::move(reps[r]));
    else
      ++out.failures;
  }
  if (static_cast<double>(out.failures) > 0.1 * n_boot)
    throw FitError("bootstrap: " + std::to_string(out.failures) + " of " + std::to_string(n_boot) +
                   " replicate fits failed");
  for (std::size_t q = 0; q < out.estimate.size(); ++q) {
    std::vector<double> v;
    for (const auto& rep : out.replicates) v.push_back(rep[q]);
    out.intervals.push_back(percentile_interval(std::move(v), level));
  }
  return out;
}

}  // namespace tailchain
