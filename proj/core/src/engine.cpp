#include "tailchain/engine.hpp"

#include <algorithm>
#include <numeric>

#include "tailchain/error.hpp"
#include "tailchain/parallel.hpp"
#include "tailchain/stats.hpp"

namespace tailchain {

const char* to_string(Family f) {
  switch (f) {
    case Family::mmem: return "mmem";
    case Family::evar: return "evar";
    default: return "evar0";
  }
}

Family family_from_string(const std::string& s) {
  if (s == "mmem") return Family::mmem;
  if (s == "evar") return Family::evar;
  if (s == "evar0") return Family::evar0;
  throw ConfigError("unknown model family '" + s + "'");
}

int chain_order(const ChainModel& c) {
  return std::visit([](const auto& p) { return p.k; }, c);
}

Direction chain_direction(const ChainModel& c) {
  return std::visit([](const auto& p) { return p.direction; }, c);
}

ChainStep chain_step(const ChainModel& c, std::span<const Vec2> history, Rng& rng) {
  if (const auto* m = std::get_if<MMEMParams>(&c)) return mmem_step(history, *m, rng);
  return evar_step(history, std::get<EVARParams>(c), history[0][0], rng);
}

void ExcursionModel::validate() const {
  if (k < 1) throw ConfigError("excursion model order must be at least 1");
  if (peak.k != k || chain_order(forward) != k || chain_order(backward) != k)
    throw ConfigError("peak and chain model orders differ");
  if (chain_direction(forward) != Direction::forward || chain_direction(backward) != Direction::backward)
    throw ConfigError("chain models have the wrong time direction");
  if (anchors.empty()) throw ConfigError("excursion model has no storm-maximum directions");
  if (max_rejects < 0 || max_steps < 1) throw ConfigError("invalid simulation caps");
  storm_max.validate();
}

PreparedData prepare_data(const MetOceanSeries& series, const PrepareOptions& options) {
  series.validate();
  if (!(options.threshold_prob > 0.5 && options.threshold_prob < 1.0))
    throw ConfigError("threshold probability must lie in (0.5, 1)");
  PreparedData d;
  d.hs_margin = SemiParametricMarginal::fit(series.hs, series.theta_h, Variable::hs, options.marginal);
  d.ws_margin = SemiParametricMarginal::fit(series.ws, series.theta_w, Variable::ws, options.marginal);
  d.u = laplace_quantile(options.threshold_prob);
  d.laplace = to_laplace_series(series, d.hs_margin, d.ws_margin);
  d.excursions = extract_excursions(d.laplace.y, series, d.u, ExtractOptions{options.context});
  return d;
}

namespace {

ChainModel fit_chain(std::span<const Excursion> excursions, Direction dir, double u, const ModelOptions& o) {
  ChainFitOptions chain{o.fit, o.threads};
  if (o.family == Family::mmem) return fit_mmem(excursions, o.k, dir, u, chain);
  EVAROptions eo;
  eo.force_B_zero = o.family == Family::evar0;
  eo.chain = chain;
  return fit_evar(excursions, o.k, dir, u, eo);
}

}  // namespace

ExcursionModel fit_excursion_model(std::span<const Excursion> excursions, const SemiParametricMarginal& hs_margin,
                                   const SemiParametricMarginal& ws_margin, double u, const ModelOptions& options) {
  ExcursionModel m;
  m.k = options.k;
  m.u = u;
  m.max_rejects = options.max_rejects;
  m.hs_margin = hs_margin;
  m.ws_margin = ws_margin;
  m.peak = fit_peak_model(excursions, options.k, u, PeakFitOptions{options.fit, options.threads, 50});
  m.forward = fit_chain(excursions, Direction::forward, u, options);
  m.backward = fit_chain(excursions, Direction::backward, u, options);

  std::vector<double> excess;
  for (const auto& e : excursions) {
    if (e.censored) continue;
    if (e.peak() > u) excess.push_back(e.peak() - u);
    if (e.has_physical()) m.anchors.push_back({e.theta_h[e.row(e.i_star)], e.theta_w[e.row(e.i_star)]});
  }
  m.storm_max = fit_gpd(excess);
  m.storm_max.u_x = u;
  m.storm_max.zeta_u = 1.0 - laplace_cdf(u);
  m.post = {fit_wave_direction(excursions, Direction::forward, options.p1),
            fit_wind_offset(excursions, Direction::forward, options.p2)};
  m.pre = {fit_wave_direction(excursions, Direction::backward, options.p1),
           fit_wind_offset(excursions, Direction::backward, options.p2)};
  m.validate();
  return m;
}

namespace {

struct SideResult {
  std::vector<Vec2> rows;  ///< chain time, row 0 is the peak
  Vec2 dip{0.0, 0.0};
  bool rejected = false;
};

SideResult simulate_side(const ExcursionModel& m, const ChainModel& chain, const PeakPeriod& peak, int sign, double y0,
                         Rng& rng, SimulationStats& stats) {
  SideResult s;
  s.rows.push_back(peak.at(0));
  for (int r = 1; r < m.k; ++r) {
    const Vec2& v = peak.at(sign * r);
    if (!(v[0] > m.u)) {
      s.dip = v;
      return s;
    }
    if (v[0] > y0) {
      s.rejected = true;
      return s;
    }
    s.rows.push_back(v);
  }
  const auto k = static_cast<std::size_t>(m.k);
  for (int step = 0;; ++step) {
    if (step >= m.max_steps) {
      s.rejected = true;
      return s;
    }
    const ChainStep next = chain_step(chain, std::span<const Vec2>(s.rows).last(k), rng);
    stats.fallbacks += next.fallback ? 1 : 0;
    if (!(next.value[0] > m.u)) {
      s.dip = next.value;
      return s;
    }
    if (next.value[0] > y0) {
      s.rejected = true;
      return s;
    }
    s.rows.push_back(next.value);
  }
}

}  // namespace

Excursion simulate_excursion(const ExcursionModel& m, Rng& rng, SimulationStats* stats_out) {
  SimulationStats stats;
  for (;;) {
    const double y0 = m.u + gpd_sample(m.storm_max, rng);
    const PeakPeriod peak = simulate_peak(m.peak, y0, rng);
    SideResult post = simulate_side(m, m.forward, peak, 1, y0, rng, stats);
    SideResult pre;
    if (!post.rejected) pre = simulate_side(m, m.backward, peak, -1, y0, rng, stats);
    if (post.rejected || pre.rejected) {
      if (++stats.rejections > static_cast<std::size_t>(m.max_rejects))
        throw SimulationError("excursion simulation exceeded " + std::to_string(m.max_rejects) +
                              " rejections (rejection rate " +
                              std::to_string(static_cast<double>(stats.rejections) /
                                             static_cast<double>(stats.rejections + 1)) +
                              ")");
      continue;
    }

    Excursion e;
    const auto n_pre = static_cast<std::int64_t>(pre.rows.size()) - 1;
    const auto n_post = static_cast<std::int64_t>(post.rows.size()) - 1;
    e.lo = 0;
    e.a = 1;
    e.i_star = 1 + n_pre;
    e.b = e.i_star + n_post;
    e.hi = e.b + 1;
    e.y.reserve(static_cast<std::size_t>(e.hi + 1));
    e.y.push_back(pre.dip);
    for (std::int64_t r = n_pre; r >= 1; --r) e.y.push_back(pre.rows[static_cast<std::size_t>(r)]);
    e.y.push_back(post.rows[0]);
    for (std::int64_t r = 1; r <= n_post; ++r) e.y.push_back(post.rows[static_cast<std::size_t>(r)]);
    e.y.push_back(post.dip);

    const std::size_t rows = e.y.size();
    const auto centre = static_cast<std::size_t>(e.i_star);
    e.hs.assign(rows, 0.0);
    e.ws.assign(rows, 0.0);
    e.theta_h.assign(rows, 0.0);
    e.theta_w.assign(rows, 0.0);
    const Vec2 anchor = m.anchors[uniform_index(rng, m.anchors.size())];
    auto fill = [&](std::size_t t, double th, double tw) {
      e.theta_h[t] = th;
      e.theta_w[t] = tw;
      e.hs[t] = m.hs_margin.from_laplace(e.y[t][0], th);
      e.ws[t] = m.ws_margin.from_laplace(e.y[t][1], tw);
    };
    DirectionWalker fwd(m.post, anchor[0], anchor[1], rng);
    fill(centre, fwd.theta_h(), fwd.theta_w());
    for (std::size_t t = centre + 1; t < rows; ++t) {
      fwd.advance(e.hs[t - 1], rng);
      fill(t, fwd.theta_h(), fwd.theta_w());
    }
    DirectionWalker bwd(m.pre, anchor[0], anchor[1], rng);
    for (std::size_t t = centre; t-- > 0;) {
      bwd.advance(e.hs[t + 1], rng);
      fill(t, bwd.theta_h(), bwd.theta_w());
    }
    if (stats_out) {
      stats_out->rejections += stats.rejections;
      stats_out->fallbacks += stats.fallbacks;
    }
    return e;
  }
}

std::size_t Ensemble::total_rejections() const { return std::accumulate(rejections.begin(), rejections.end(), std::size_t{0}); }

double Ensemble::rejection_rate() const {
  const double rej = static_cast<double>(total_rejections());
  const double total = rej + static_cast<double>(excursions.size());
  return total > 0.0 ? rej / total : 0.0;
}

Ensemble simulate_ensemble(const ExcursionModel& m, std::size_t n, std::uint64_t seed, unsigned threads) {
  m.validate();
  Ensemble out;
  out.excursions.resize(n);
  out.rejections.assign(n, 0);
  std::vector<std::size_t> fallbacks(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    SimulationStats stats;
    out.excursions[i] = simulate_excursion(m, rng, &stats);
    out.rejections[i] = stats.rejections;
    fallbacks[i] = stats.fallbacks;
  });
  out.fallbacks = std::accumulate(fallbacks.begin(), fallbacks.end(), std::size_t{0});
  return out;
}

}  // namespace tailchain
