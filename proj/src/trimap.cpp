#include "dsod/trimap.hpp"

#include <random>
#include <stdexcept>

#include "dsod/morphology.hpp"

namespace dsod {

Trimap trimap_from_mask(const BinaryMask& mask, int kernel) {
  require_odd_kernel(kernel, "trimap_from_mask");
  const BinaryMask inner = erode(mask, kernel);
  const BinaryMask outer = dilate(mask, kernel);
  Trimap trimap(mask.height(), mask.width());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (inner[i] != 0) {
      trimap[i] = kSalient;
    } else if (outer[i] == 0) {
      trimap[i] = kBackground;
    } else {
      trimap[i] = kUncertain;
    }
  }
  return trimap;
}

int draw_trimap_kernel(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, kTrimapKernels.size() - 1);
  return kTrimapKernels[pick(rng)];
}

Trimap random_trimap_from_mask(const BinaryMask& mask, std::uint64_t seed) {
  return trimap_from_mask(mask, draw_trimap_kernel(seed));
}

Trimap trimap_from_saliency(const SaliencyMap& saliency, float threshold, int kernel) {
  if (!(threshold > 0.0F && threshold < 1.0F)) {
    throw std::invalid_argument("trimap_from_saliency: threshold must be in (0,1)");
  }
  return trimap_from_mask(binarize(saliency, threshold), kernel);
}

BinaryMask interior_boundary(const BinaryMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  BinaryMask out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(y, x) == 0) continue;
      const bool edge = (y > 0 && mask.at(y - 1, x) == 0) || (y + 1 < h && mask.at(y + 1, x) == 0) ||
                        (x > 0 && mask.at(y, x - 1) == 0) || (x + 1 < w && mask.at(y, x + 1) == 0);
      out.at(y, x) = edge ? 1 : 0;
    }
  }
  return out;
}

TrimapCounts count_labels(const Trimap& trimap) {
  TrimapCounts counts;
  for (auto v : trimap.values()) {
    switch (v) {
      case kBackground: ++counts.background; break;
      case kUncertain: ++counts.uncertain; break;
      case kSalient: ++counts.salient; break;
      default: throw std::invalid_argument("count_labels: label out of range");
    }
  }
  return counts;
}

}  // namespace dsod
