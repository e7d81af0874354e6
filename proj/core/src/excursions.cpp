#include "tailchain/excursions.hpp"

#include <algorithm>
#include <cmath>

#include "tailchain/error.hpp"
#include "tailchain/random.hpp"

namespace tailchain {

std::size_t Excursion::row(std::int64_t t) const {
  if (!stores(t)) throw DomainError("excursion does not store time " + std::to_string(t));
  return static_cast<std::size_t>(t - lo);
}

void Excursion::validate(double u) const {
  if (!(lo <= a && a <= i_star && i_star <= b && b <= hi)) throw DataError("excursion indices out of order");
  if (y.size() != static_cast<std::size_t>(hi - lo + 1)) throw DataError("excursion row count mismatch");
  if (has_physical() && (hs.size() != y.size() || ws.size() != y.size() || theta_h.size() != y.size() ||
                         theta_w.size() != y.size()))
    throw DataError("excursion physical columns misaligned");
  for (std::int64_t t = a; t <= b; ++t) {
    if (!(at(t)[0] > u)) throw DataError("excursion interior value not above threshold");
    if (at(t)[0] > at(i_star)[0]) throw DataError("excursion maximum misplaced");
  }
  if (stores(a - 1) && at(a - 1)[0] > u) throw DataError("excursion not maximal at its start");
  if (stores(b + 1) && at(b + 1)[0] > u) throw DataError("excursion not maximal at its end");
}

LaplaceSeries to_laplace_series(const MetOceanSeries& series, const SemiParametricMarginal& hs_margin,
                                const SemiParametricMarginal& ws_margin) {
  LaplaceSeries out;
  out.y.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const LaplaceValue h = hs_margin.to_laplace(series.hs[i], series.theta_h[i]);
    const LaplaceValue w = ws_margin.to_laplace(series.ws[i], series.theta_w[i]);
    out.y[i] = {h.y, w.y};
    out.clamped += static_cast<std::size_t>(h.clamped) + static_cast<std::size_t>(w.clamped);
  }
  return out;
}

namespace {

std::vector<Excursion> extract(std::span<const Vec2> y, const MetOceanSeries* physical, double u,
                               const ExtractOptions& options) {
  if (!(u > 0.0)) throw DomainError("extract_excursions: threshold must be positive");
  if (options.context < 0) throw ConfigError("extract_excursions: context must be non-negative");
  if (physical && physical->size() != y.size()) throw DataError("extract_excursions: physical series length mismatch");
  const auto n = static_cast<std::int64_t>(y.size());
  std::vector<Excursion> out;
  std::int64_t t = 0;
  while (t < n) {
    if (!(y[t][0] > u)) {
      ++t;
      continue;
    }
    Excursion e;
    e.a = t;
    e.i_star = t;
    while (t < n && y[t][0] > u) {
      if (y[t][0] > y[e.i_star][0]) e.i_star = t;
      ++t;
    }
    e.b = t - 1;
    e.censored = e.a == 0 || e.b == n - 1;
    e.lo = std::max<std::int64_t>(0, e.a - options.context);
    e.hi = std::min<std::int64_t>(n - 1, e.b + options.context);
    e.y.assign(y.begin() + e.lo, y.begin() + e.hi + 1);
    if (physical) {
      auto slice = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + e.lo, v.begin() + e.hi + 1);
      };
      e.hs = slice(physical->hs);
      e.ws = slice(physical->ws);
      e.theta_h = slice(physical->theta_h);
      e.theta_w = slice(physical->theta_w);
    }
    out.push_back(std::move(e));
  }
  return out;
}

Interval bootstrap_ratio(const std::vector<double>& m, const std::vector<double>& n, const BootstrapOptions& options) {
  Rng rng(options.seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(options.n_boot));
  for (int r = 0; r < options.n_boot; ++r) {
    double sm = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::size_t j = uniform_index(rng, m.size());
      sm += m[j];
      sn += n[j];
    }
    if (sn > 0.0) stats.push_back(sm / sn);
  }
  if (stats.empty()) return {};
  return percentile_interval(std::move(stats), options.level);
}

ChiEstimate finish_chi(const std::vector<double>& m, const std::vector<double>& n, const BootstrapOptions& options) {
  double sm = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    sm += m[i];
    sn += n[i];
  }
  if (sn < 50.0)
    throw InsufficientDataError("chi estimate needs at least 50 exceedances, got " +
                                std::to_string(static_cast<long long>(sn)));
  ChiEstimate out;
  out.value = sm / sn;
  out.exceedances = static_cast<std::size_t>(sn);
  out.band = bootstrap_ratio(m, n, options);
  return out;
}

}  // namespace

std::vector<Excursion> extract_excursions(std::span<const Vec2> y, double u, const ExtractOptions& options) {
  return extract(y, nullptr, u, options);
}

std::vector<Excursion> extract_excursions(std::span<const Vec2> y, const MetOceanSeries& physical, double u,
                                          const ExtractOptions& options) {
  return extract(y, &physical, u, options);
}

Partition partition(const Excursion& e, int k) {
  if (k < 1) throw ConfigError("partition: order must be at least 1");
  const std::int64_t first = e.i_star - (k - 1), last = e.i_star + (k - 1);
  if (!e.stores(first) || !e.stores(last))
    throw CensoredPeakError("peak window of the excursion at time " + std::to_string(e.a) +
                            " extends past the stored observations");
  Partition p;
  p.peak.k = k;
  for (std::int64_t t = first; t <= last; ++t) p.peak.rows.push_back(e.at(t));
  for (std::int64_t t = e.a; t <= e.i_star; ++t) p.pre.push_back(t);
  for (std::int64_t t = e.i_star; t <= e.b; ++t) p.post.push_back(t);
  return p;
}

const char* to_string(ChiPair p) {
  switch (p) {
    case ChiPair::HH: return "HH";
    case ChiPair::HW: return "HW";
    default: return "WW";
  }
}

ChiPair chi_pair_from_string(const std::string& s) {
  if (s == "HH") return ChiPair::HH;
  if (s == "HW") return ChiPair::HW;
  if (s == "WW") return ChiPair::WW;
  throw ConfigError("unknown chi pair '" + s + "'");
}

ChiEstimate chi_estimate(std::span<const Vec2> y, double u, int lag, ChiPair pair, const BootstrapOptions& options) {
  if (lag < 1) throw ConfigError("chi_estimate: lag must be at least 1");
  const std::size_t first = pair == ChiPair::WW ? 1 : 0;
  const std::size_t second = pair == ChiPair::HH ? 0 : 1;
  const auto l = static_cast<std::size_t>(lag);
  // Per run of consecutive conditioning exceedances: joint count and total.
  std::vector<double> m, n;
  bool in_run = false;
  for (std::size_t t = 0; t + l < y.size(); ++t) {
    if (!(y[t][first] > u)) {
      in_run = false;
      continue;
    }
    if (!in_run) {
      m.push_back(0.0);
      n.push_back(0.0);
      in_run = true;
    }
    n.back() += 1.0;
    if (y[t + l][second] > u) m.back() += 1.0;
  }
  return finish_chi(m, n, options);
}

ChiEstimate chi_from_excursions(std::span<const Excursion> excursions, double u, int lag, ChiPair pair,
                                const BootstrapOptions& options) {
  if (lag < 1) throw ConfigError("chi_from_excursions: lag must be at least 1");
  if (pair == ChiPair::WW) throw ConfigError("chi_from_excursions supports HH and HW only");
  const std::size_t second = pair == ChiPair::HH ? 0 : 1;
  std::vector<double> m, n;
  m.reserve(excursions.size());
  n.reserve(excursions.size());
  for (const auto& e : excursions) {
    double em = 0.0, en = 0.0;
    for (std::int64_t t = e.a; t <= e.b; ++t) {
      const std::int64_t s = t + lag;
      if (!e.stores(s)) {
        if (pair == ChiPair::HH) en += 1.0;
        continue;
      }
      en += 1.0;
      if (e.at(s)[second] > u) em += 1.0;
    }
    m.push_back(em);
    n.push_back(en);
  }
  return finish_chi(m, n, options);
}

SurvivalCurve survival_curve(std::span<const Excursion> excursions, double peak_lo, double peak_hi, int max_lag,
                             const BootstrapOptions& options) {
  if (max_lag < 0) throw ConfigError("survival_curve: max_lag must be non-negative");
  std::vector<const Excursion*> chosen;
  for (const auto& e : excursions) {
    if (!e.has_physical()) throw DataError("survival_curve: excursions need physical wave heights");
    const double h = e.hs[e.row(e.i_star)];
    if (h >= peak_lo && h <= peak_hi) chosen.push_back(&e);
  }
  if (chosen.size() < 20)
    throw InsufficientDataError("survival_curve needs at least 20 excursions with peak in range, got " +
                                std::to_string(chosen.size()));
  const std::size_t width = static_cast<std::size_t>(2 * max_lag + 1);
  // Per excursion the curve is an indicator of lag within [a - i*, b - i*].
  auto survives = [](const Excursion& e, int tau) {
    return tau >= 0 ? e.i_star + tau <= e.b : e.i_star + tau >= e.a;
  };
  SurvivalCurve out;
  out.n_excursions = chosen.size();
  out.lags.resize(width);
  out.prob.assign(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    out.lags[j] = static_cast<int>(j) - max_lag;
    std::size_t hits = 0;
    for (const Excursion* e : chosen) hits += survives(*e, out.lags[j]) ? 1 : 0;
    out.prob[j] = static_cast<double>(hits) / static_cast<double>(chosen.size());
  }
  Rng rng(options.seed);
  std::vector<std::vector<double>> reps(width);
  std::vector<std::size_t> hits(width);
  for (int r = 0; r < options.n_boot; ++r) {
    std::fill(hits.begin(), hits.end(), 0);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const Excursion& e = *chosen[uniform_index(rng, chosen.size())];
      for (std::size_t j = 0; j < width; ++j) hits[j] += survives(e, out.lags[j]) ? 1 : 0;
    }
    for (std::size_t j = 0; j < width; ++j)
      reps[j].push_back(static_cast<double>(hits[j]) / static_cast<double>(chosen.size()));
  }
  out.band.resize(width);
  for (std::size_t j = 0; j < width; ++j)
    out.band[j] = options.n_boot > 0 ? percentile_interval(std::move(reps[j]), options.level)
                                     : Interval{out.prob[j], out.prob[j]};
  return out;
}

}  // namespace tailchain
