#pragma once

#include <array>
#include <stdexcept>

#include "dsod/hrrn.hpp"
#include "dsod/lrscn.hpp"
#include "dsod/raster.hpp"

namespace dsod {

/// 2 x 2 quadrant split of a canonical square.
struct TileLayout {
  int canonical_size = 256;
  int tile_size = 128;
  int original_height = 0;
  int original_width = 0;

  /// Throws std::invalid_argument unless canonical = 2 * tile, the tile is
  /// divisible by `divisor` and the original dims are at least 8.
  void validate(int divisor = 1) const;
};

/// Quadrant order: top-left, top-right, bottom-left, bottom-right.
enum Quadrant { kTopLeft = 0, kTopRight = 1, kBottomLeft = 2, kBottomRight = 3 };

struct Tile {
  Image image;
  Trimap trimap;
};

inline int quadrant_y(int q, int tile) { return q >= kBottomLeft ? tile : 0; }
inline int quadrant_x(int q, int tile) { return q % 2 == 1 ? tile : 0; }

template <typename T, typename Tag>
std::array<Plane<T, Tag>, 4> split_quadrants(const Plane<T, Tag>& canvas, int tile) {
  if (canvas.height() != 2 * tile || canvas.width() != 2 * tile) {
    throw std::invalid_argument("split_quadrants: canvas must be 2 * tile square");
  }
  std::array<Plane<T, Tag>, 4> out;
  for (int q = 0; q < 4; ++q) out[q] = crop(canvas, quadrant_y(q, tile), quadrant_x(q, tile), tile, tile);
  return out;
}

/// Places four tile_size quadrants on a canonical canvas. No blending.
template <typename T, typename Tag>
Plane<T, Tag> stitch_quadrants(const std::array<Plane<T, Tag>, 4>& tiles, int tile) {
  Plane<T, Tag> canvas(2 * tile, 2 * tile);
  for (int q = 0; q < 4; ++q) {
    if (tiles[q].height() != tile || tiles[q].width() != tile) {
      throw std::invalid_argument("stitch: tile has the wrong size");
    }
    const int y0 = quadrant_y(q, tile);
    const int x0 = quadrant_x(q, tile);
    for (int y = 0; y < tile; ++y) {
      for (int x = 0; x < tile; ++x) canvas.at(y0 + y, x0 + x) = tiles[q].at(y, x);
    }
  }
  return canvas;
}

std::array<Image, 4> split_quadrants(const Image& canvas, int tile);

/// Bilinear image resize and nearest trimap resize to the canonical size,
/// then the quadrant split.
std::array<Tile, 4> prepare(const Image& image, const Trimap& trimap, const TileLayout& layout);

/// Quadrants back onto the canonical canvas.
SaliencyMap stitch(const std::array<SaliencyMap, 4>& tiles, const TileLayout& layout);
/// Stitch followed by a bilinear resize to the original dims.
SaliencyMap stitch_to_original(const std::array<SaliencyMap, 4>& tiles, const TileLayout& layout);

struct PipelineResult {
  SaliencyMap saliency;          // original resolution
  Trimap trimap;                 // original resolution (nearest)
  Trimap canonical_trimap;       // what the refinement network saw
  SaliencyMap canonical_saliency;
  UncertaintyMap canonical_logvar;
};

/// LRSCN on the image resized to its input size, trimap prediction at the
/// canonical size, per-tile refinement, stitch, resize back. `order` fixes
/// the sequence in which tiles are refined.
PipelineResult run_pipeline(const Image& image, Lrscn& lrscn, Hrrn& hrrn, int canonical_size,
                            const std::array<int, 4>& order = {0, 1, 2, 3});

/// Mean absolute gradient across the two seam lines divided by the mean
/// absolute gradient everywhere else (both axes, forward differences).
/// Returns 0 for a constant canvas.
double seam_ratio(const SaliencyMap& canvas);

}  // namespace dsod
