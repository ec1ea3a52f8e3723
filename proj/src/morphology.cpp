#include "dsod/morphology.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace dsod {
namespace {

// A square window min/max is separable, and so is clamping coordinates to
// the raster, so two 1-D passes give the exact replicate-padded result.
template <typename Reduce>
BinaryMask square_filter(const BinaryMask& mask, int kernel, Reduce reduce) {
  const int h = mask.height();
  const int w = mask.width();
  const int r = kernel / 2;
  BinaryMask rows(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t acc = mask.at(y, std::clamp(x - r, 0, w - 1));
      for (int dx = -r + 1; dx <= r; ++dx) acc = reduce(acc, mask.at(y, std::clamp(x + dx, 0, w - 1)));
      rows.at(y, x) = acc;
    }
  }
  BinaryMask out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t acc = rows.at(std::clamp(y - r, 0, h - 1), x);
      for (int dy = -r + 1; dy <= r; ++dy) acc = reduce(acc, rows.at(std::clamp(y + dy, 0, h - 1), x));
      out.at(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

void require_odd_kernel(int kernel, const char* what) {
  if (kernel < 3 || kernel % 2 == 0) {
    throw std::invalid_argument(std::string(what) + ": kernel must be odd and >= 3, got " +
                                std::to_string(kernel));
  }
}

BinaryMask erode(const BinaryMask& mask, int kernel) {
  require_odd_kernel(kernel, "erode");
  if (mask.empty()) return mask;
  return square_filter(mask, kernel, [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

BinaryMask dilate(const BinaryMask& mask, int kernel) {
  require_odd_kernel(kernel, "dilate");
  if (mask.empty()) return mask;
  return square_filter(mask, kernel, [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

BinaryMask corrupt_mask(const BinaryMask& mask, int kernel, CorruptionMode mode,
                        std::uint64_t seed) {
  require_odd_kernel(kernel, "corrupt_mask");
  if (mode == CorruptionMode::kRandom) {
    std::mt19937_64 rng(seed);
    mode = (rng() & 1U) == 0 ? CorruptionMode::kErode : CorruptionMode::kDilate;
  }
  return mode == CorruptionMode::kErode ? erode(mask, kernel) : dilate(mask, kernel);
}

}  // namespace dsod
