#include "tailchain/assess.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "tailchain/hm.hpp"

namespace tailchain {

std::array<double, 20> percentile_grid() {
  std::array<double, 20> g{};
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = 0.97 + (0.999 - 0.97) * static_cast<double>(j) / 19.0;
  g.back() = 0.999;
  return g;
}

double distance_D(std::span<const double> model_sample, std::span<const double> empirical_sample) {
  const auto grid = percentile_grid();
  return distance_D(model_sample, empirical_sample, grid);
}

double distance_D(std::span<const double> model_sample, std::span<const double> empirical_sample,
                  std::span<const double> grid) {
  if (model_sample.empty() || empirical_sample.empty()) throw InsufficientDataError("distance_D: empty sample");
  std::vector<double> m(model_sample.begin(), model_sample.end());
  std::vector<double> e(empirical_sample.begin(), empirical_sample.end());
  std::sort(m.begin(), m.end());
  std::sort(e.begin(), e.end());
  double total = 0.0;
  for (double p : grid) {
    const double qe = quantile_sorted(e, p);
    if (qe == 0.0) throw DomainError("distance_D: empirical quantile is zero");
    total += std::abs(qe - quantile_sorted(m, p)) / qe;
  }
  return total / static_cast<double>(grid.size());
}

ModelSpec chain_model_spec(Family family, int k, const SemiParametricMarginal& hs_margin,
                           const SemiParametricMarginal& ws_margin, double u, ModelOptions options) {
  options.family = family;
  options.k = k;
  ModelSpec spec;
  spec.family = to_string(family);
  spec.order = k;
  spec.name = spec.family + "(" + std::to_string(k) + ")";
  spec.fit = [options, hs_margin, ws_margin, u](std::span<const Excursion> train, std::uint64_t seed) -> Sampler {
    ModelOptions o = options;
    o.fit.seed = seed;
    auto model = std::make_shared<ExcursionModel>(fit_excursion_model(train, hs_margin, ws_margin, u, o));
    return [model](std::size_t n, std::uint64_t s) { return simulate_ensemble(*model, n, s).excursions; };
  };
  return spec;
}

ModelSpec hm_model_spec(const SemiParametricMarginal& hs_margin, const SemiParametricMarginal& ws_margin) {
  ModelSpec spec;
  spec.name = "hm";
  spec.family = "hm";
  spec.fit = [hs_margin, ws_margin](std::span<const Excursion> train, std::uint64_t) -> Sampler {
    auto model = std::make_shared<HMModel>(fit_hm(train, hs_margin));
    return [model, hs_margin, ws_margin](std::size_t n, std::uint64_t s) {
      std::vector<Excursion> out(n);
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_stream(s, i);
        out[i] = hm_simulate(*model, rng, &hs_margin, &ws_margin).excursion;
      }
      return out;
    };
  };
  return spec;
}

const char* to_string(Statistic s) { return s == Statistic::rmax ? "rmax" : "rsum"; }

std::vector<std::size_t> partition_indices(std::size_t n, std::uint64_t seed, int p) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_stream(seed, static_cast<std::uint64_t>(p));
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  return idx;
}

namespace {

std::vector<double> responses(std::span<const Excursion> ex, const ResponseConfig& cfg, Statistic s) {
  std::vector<double> out;
  out.reserve(ex.size());
  for (const auto& e : ex) out.push_back((s == Statistic::rmax ? rmax(e, cfg) : rsum(e, cfg)).value);
  return out;
}

}  // namespace

CVReport cross_validate(std::span<const Excursion> excursions, std::span<const ModelSpec> models,
                        const CVOptions& options) {
  if (excursions.size() < options.min_excursions)
    throw InsufficientDataError("cross-validation needs at least " + std::to_string(options.min_excursions) +
                                " excursions, got " + std::to_string(excursions.size()));
  if (options.n_partitions < 1) throw ConfigError("cross-validation needs at least one partition");
  if (!(options.train_frac > 0.0 && options.train_frac < 1.0))
    throw ConfigError("training fraction must lie in (0,1)");
  if (options.responses.empty()) throw ConfigError("cross-validation needs at least one response configuration");
  for (const auto& r : options.responses) r.validate();

  const std::size_t n = excursions.size();
  const auto n_train = static_cast<std::size_t>(std::llround(options.train_frac * static_cast<double>(n)));
  const std::size_t n_stats = options.responses.size() * 2;
  const auto P = static_cast<std::size_t>(options.n_partitions);

  // results[model][partition][stat]; NaN marks a failed partition.
  std::vector<std::vector<std::vector<double>>> results(
      models.size(), std::vector<std::vector<double>>(P, std::vector<double>(n_stats, std::nan(""))));
  std::vector<std::vector<std::string>> errors(models.size() * P);

  parallel_for(models.size() * P, options.threads, [&](std::size_t task) {
    const std::size_t mi = task / P, p = task % P;
    const auto idx = partition_indices(n, options.seed, static_cast<int>(p));
    std::vector<Excursion> train, test;
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? train : test).push_back(excursions[idx[i]]);
    const std::uint64_t part_seed = splitmix64(options.seed ^ splitmix64(p + 1));
    try {
      const Sampler sampler = models[mi].fit(train, part_seed);
      const auto sim = sampler(options.ensemble_size, part_seed);
      for (std::size_t r = 0; r < options.responses.size(); ++r) {
        for (int s = 0; s < 2; ++s) {
          const auto st = static_cast<Statistic>(s);
          results[mi][p][r * 2 + static_cast<std::size_t>(s)] =
              distance_D(responses(sim, options.responses[r], st), responses(test, options.responses[r], st));
        }
      }
    } catch (const Error& e) {
      errors[task].push_back(e.what());
    }
  });

  CVReport report;
  report.n_partitions = options.n_partitions;
  report.train_frac = options.train_frac;
  report.train_size = n_train;
  report.seed = options.seed;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    for (std::size_t r = 0; r < options.responses.size(); ++r) {
      for (int s = 0; s < 2; ++s) {
        CVRow row;
        row.model = models[mi].name;
        row.family = models[mi].family;
        row.order = models[mi].order;
        row.response = r;
        row.statistic = static_cast<Statistic>(s);
        for (std::size_t p = 0; p < P; ++p) {
          const double v = results[mi][p][r * 2 + static_cast<std::size_t>(s)];
          if (std::isnan(v)) {
            row.failed.push_back(static_cast<int>(p));
            for (const auto& msg : errors[mi * P + p]) row.errors.push_back(msg);
          } else {
            row.values.push_back(v);
          }
        }
        if (!row.values.empty()) {
          row.mean_D = mean(row.values);
          row.interval = percentile_interval(row.values, 0.80);
        } else {
          row.mean_D = std::nan("");
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

}  // namespace tailchain
