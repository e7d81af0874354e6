#pragma once

#include <span>
#include <vector>

#include "tailchain/condext.hpp"
#include "tailchain/types.hpp"

namespace tailchain {

/// k + 1 consecutive rows in chain time; row 0 is the anchoring exceedance.
/// Backward windows read the series in reverse (t, t-1, ..., t-k).
using ChainWindow = std::vector<Vec2>;

/// One window per first-component exceedance t of every excursion (censored
/// ones included) whose rows up to t +/- k are stored.
std::vector<ChainWindow> extract_windows(std::span<const Excursion> excursions, int k, Direction dir, double u);

struct ChainFitOptions {
  FitOptions fit;
  unsigned threads = 1;
};

/// Per-entry HT fits of every window cell on the anchor. Residual sample
/// columns follow the flat order of the chain irregular matrix.
PeakModel fit_chain_entries(std::span<const ChainWindow> windows, int k, double u, const ChainFitOptions& options);

struct MMEMParams {
  int k = 1;
  double u = 0.0;
  Direction direction = Direction::forward;
  IrregularMatrix alpha0;  ///< rows 0..k, columns (hs, ws), no (0,0)
  IrregularMatrix beta0;
  std::vector<double> mu;
  std::vector<double> sigma2;
  ResidualSample residuals;  ///< dimension 2k + 1
  std::vector<std::size_t> at_bound;
};

MMEMParams fit_mmem(std::span<const Excursion> excursions, int k, Direction dir, double u,
                    const ChainFitOptions& options = {});
MMEMParams fit_mmem_windows(std::span<const ChainWindow> windows, int k, Direction dir, double u,
                            const ChainFitOptions& options = {});

struct ChainStep {
  Vec2 value{0.0, 0.0};
  bool fallback = false;  ///< residual draw used the nearest-neighbour component
};

/// Next value after `history` (k rows, oldest first in chain time). The anchor
/// is history[0][0] and must exceed u.
ChainStep mmem_step(std::span<const Vec2> history, const MMEMParams& p, Rng& rng);

/// Residuals implied by the history: the first 2k - 1 flat entries.
std::vector<double> mmem_history_residuals(std::span<const Vec2> history, const MMEMParams& p);
/// Window rows alpha y + y^beta eps for the flat residual vector eps (any
/// leading length); row 0 first column is y.
std::vector<Vec2> mmem_window_from_residuals(double y, std::span<const double> eps, const MMEMParams& p);

}  // namespace tailchain
