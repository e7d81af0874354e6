#pragma once

#include <array>

namespace tailchain {

/// Bivariate (wave height, wind speed) value on Laplace scale.
using Vec2 = std::array<double, 2>;

/// Time direction of a chain model: forward for the post-peak period,
/// backward (fitted on the time-reversed series) for the pre-peak period.
enum class Direction { forward, backward };

inline const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

}  // namespace tailchain
