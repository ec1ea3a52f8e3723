#pragma once

#include <array>
#include <cstdint>

#include "dsod/raster.hpp"

namespace dsod {

/// Band widths drawn when generating training trimaps from ground truth.
inline constexpr std::array<int, 5> kTrimapKernels{5, 7, 9, 11, 13};

/// 2 = erode(mask), 0 = outside dilate(mask), 1 = the band in between.
/// Any odd kernel >= 3 is accepted.
Trimap trimap_from_mask(const BinaryMask& mask, int kernel);

/// Kernel drawn uniformly from kTrimapKernels with the given seed.
int draw_trimap_kernel(std::uint64_t seed);
Trimap random_trimap_from_mask(const BinaryMask& mask, std::uint64_t seed);

inline constexpr float kDefaultSaliencyThreshold = 0.5F;

/// Binarizes at `threshold` (s >= threshold is foreground), then applies
/// trimap_from_mask. Threshold must lie in (0, 1).
Trimap trimap_from_saliency(const SaliencyMap& saliency, float threshold, int kernel);

/// Foreground pixels with at least one in-raster 4-neighbour in the
/// background. Pixels on the frame are not boundary pixels by virtue of the
/// frame alone; this matches the replicate padding used by the morphology.
BinaryMask interior_boundary(const BinaryMask& mask);

struct TrimapCounts {
  std::size_t background = 0;
  std::size_t uncertain = 0;
  std::size_t salient = 0;
};
TrimapCounts count_labels(const Trimap& trimap);

}  // namespace dsod
