#pragma once

#include <cstdint>

#include "dsod/raster.hpp"

namespace dsod {

struct SyntheticScene {
  Image image;
  BinaryMask mask;
};

inline constexpr double kSceneNoiseSigma = 0.05;
inline constexpr double kMinForegroundFraction = 0.05;
inline constexpr double kMaxForegroundFraction = 0.60;

/// Union of `n_shapes` filled ellipses / star-convex polygons on a textured
/// background. Pure function of its arguments; the foreground fraction is
/// always within [kMinForegroundFraction, kMaxForegroundFraction].
/// Requires size >= 32 and n_shapes >= 1.
SyntheticScene gen_synthetic_scene(std::uint64_t seed, int size, int n_shapes);

/// splitmix64 finaliser, used to derive independent per-item seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

double foreground_fraction(const BinaryMask& mask);

}  // namespace dsod
