#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tailchain/condext.hpp"
#include "tailchain/data.hpp"
#include "tailchain/directional.hpp"
#include "tailchain/evar.hpp"
#include "tailchain/excursions.hpp"
#include "tailchain/margins.hpp"
#include "tailchain/mmem.hpp"

namespace tailchain {

enum class Family { mmem, evar, evar0 };
const char* to_string(Family f);
Family family_from_string(const std::string& s);

using ChainModel = std::variant<MMEMParams, EVARParams>;

int chain_order(const ChainModel& c);
Direction chain_direction(const ChainModel& c);
/// One step of either chain type; the anchor is history[0][0].
ChainStep chain_step(const ChainModel& c, std::span<const Vec2> history, Rng& rng);

struct ExcursionModel {
  int k = 1;
  double u = 0.0;
  PeakModel peak;
  ChainModel forward;
  ChainModel backward;
  GPDParams storm_max;  ///< excess of the excursion maximum over u, Laplace scale
  DirectionModels pre;
  DirectionModels post;
  std::vector<Vec2> anchors;  ///< (theta_h, theta_w) at historical storm maxima
  SemiParametricMarginal hs_margin;
  SemiParametricMarginal ws_margin;
  int max_rejects = 1000;
  int max_steps = 2000;

  void validate() const;
};

/// Margins, Laplace series, threshold and excursions of an observed series.
struct PreparedData {
  SemiParametricMarginal hs_margin;
  SemiParametricMarginal ws_margin;
  double u = 0.0;
  LaplaceSeries laplace;
  std::vector<Excursion> excursions;
};

struct PrepareOptions {
  MarginalOptions marginal;
  double threshold_prob = 0.95;  ///< dependence threshold u as a Laplace quantile
  int context = 6;
};

PreparedData prepare_data(const MetOceanSeries& series, const PrepareOptions& options = {});

struct ModelOptions {
  Family family = Family::evar;
  int k = 1;
  int p1 = 1;
  int p2 = 1;
  int max_rejects = 1000;
  unsigned threads = 1;
  FitOptions fit;
};

ExcursionModel fit_excursion_model(std::span<const Excursion> excursions, const SemiParametricMarginal& hs_margin,
                                   const SemiParametricMarginal& ws_margin, double u, const ModelOptions& options);

struct SimulationStats {
  std::size_t rejections = 0;
  std::size_t fallbacks = 0;  ///< residual draws that used the nearest component
};

/// One excursion with one below-threshold row stored on each side
/// (lo = a - 1, hi = b + 1) and physical columns filled.
Excursion simulate_excursion(const ExcursionModel& m, Rng& rng, SimulationStats* stats = nullptr);

struct Ensemble {
  std::vector<Excursion> excursions;
  std::vector<std::size_t> rejections;  ///< per excursion
  std::size_t fallbacks = 0;
  std::size_t total_rejections() const;
  /// Rejected draws as a fraction of all draws.
  double rejection_rate() const;
};

/// Excursion i uses the stream make_stream(seed, i), so output does not depend on threads.
Ensemble simulate_ensemble(const ExcursionModel& m, std::size_t n, std::uint64_t seed, unsigned threads = 1);

}  // namespace tailchain
