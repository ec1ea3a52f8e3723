#pragma once

#include <cstdint>

#include "dsod/raster.hpp"

namespace dsod {

/// Square structuring element of odd side `kernel`, replicate border
/// padding. Both throw std::invalid_argument for even or < 3 kernels.
BinaryMask erode(const BinaryMask& mask, int kernel);
BinaryMask dilate(const BinaryMask& mask, int kernel);

enum class CorruptionMode {
  kErode,
  kDilate,
  kRandom,  // erode or dilate with equal probability, drawn from the seed
};

/// Simulated annotation noise at object boundaries.
BinaryMask corrupt_mask(const BinaryMask& mask, int kernel, CorruptionMode mode,
                        std::uint64_t seed);

/// Throws unless kernel is odd and >= 3.
void require_odd_kernel(int kernel, const char* what);

}  // namespace dsod
