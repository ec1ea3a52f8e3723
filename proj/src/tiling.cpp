#include "dsod/tiling.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dsod/tensor_io.hpp"

namespace dsod {

void TileLayout::validate(int divisor) const {
  if (tile_size < 1 || canonical_size != 2 * tile_size) {
    throw std::invalid_argument("TileLayout: canonical size must be twice the tile size");
  }
  if (divisor < 1 || tile_size % divisor != 0) {
    throw std::invalid_argument("TileLayout: tile size must be divisible by " + std::to_string(divisor));
  }
  if (original_height < 8 || original_width < 8) throw std::invalid_argument("TileLayout: input dims must be >= 8");
}

std::array<Image, 4> split_quadrants(const Image& canvas, int tile) {
  if (canvas.height() != 2 * tile || canvas.width() != 2 * tile) {
    throw std::invalid_argument("split_quadrants: canvas must be 2 * tile square");
  }
  std::array<Image, 4> out;
  for (int q = 0; q < 4; ++q) out[q] = crop(canvas, quadrant_y(q, tile), quadrant_x(q, tile), tile, tile);
  return out;
}

std::array<Tile, 4> prepare(const Image& image, const Trimap& trimap, const TileLayout& layout) {
  layout.validate();
  if (image.height() != trimap.height() || image.width() != trimap.width()) {
    throw std::invalid_argument("prepare: image and trimap dims differ");
  }
  if (image.height() < 8 || image.width() < 8) throw std::invalid_argument("prepare: input dims must be >= 8");
  const int c = layout.canonical_size;
  const auto images = split_quadrants(resize_bilinear(image, c, c), layout.tile_size);
  const auto trimaps = split_quadrants(resize_nearest(trimap, c, c), layout.tile_size);
  std::array<Tile, 4> out;
  for (int q = 0; q < 4; ++q) out[q] = {images[q], trimaps[q]};
  return out;
}

SaliencyMap stitch(const std::array<SaliencyMap, 4>& tiles, const TileLayout& layout) {
  if (layout.canonical_size != 2 * layout.tile_size) throw std::invalid_argument("stitch: inconsistent layout");
  return stitch_quadrants(tiles, layout.tile_size);
}

SaliencyMap stitch_to_original(const std::array<SaliencyMap, 4>& tiles, const TileLayout& layout) {
  layout.validate();
  const SaliencyMap canvas = stitch(tiles, layout);
  if (canvas.same_shape(layout.original_height, layout.original_width)) return canvas;
  return resize_bilinear(canvas, layout.original_height, layout.original_width);
}

PipelineResult run_pipeline(const Image& image, Lrscn& lrscn, Hrrn& hrrn, int canonical_size,
                            const std::array<int, 4>& order) {
  validate(image);
  TileLayout layout{canonical_size, canonical_size / 2, image.height(), image.width()};
  layout.validate(hrrn->cfg.divisor());
  std::array<bool, 4> seen{};
  for (int q : order) {
    if (q < 0 || q > 3 || seen[q]) throw std::invalid_argument("run_pipeline: order must be a permutation of 0..3");
    seen[q] = true;
  }

  const int n = lrscn->cfg.backbone.input_size;
  const bool was_training = lrscn->is_training();
  lrscn->eval();
  Trimap canonical_trimap;
  {
    torch::NoGradGuard no_grad;
    const torch::Tensor x = to_tensor(resize_bilinear(image, n, n)).unsqueeze(0);
    canonical_trimap = predict_trimap(lrscn->forward(x), canonical_size, canonical_size);
  }
  if (was_training) lrscn->train();

  const Image canvas = resize_bilinear(image, canonical_size, canonical_size);
  const auto images = split_quadrants(canvas, layout.tile_size);
  const auto trimaps = split_quadrants(canonical_trimap, layout.tile_size);
  std::array<SaliencyMap, 4> sal;
  std::array<UncertaintyMap, 4> logvar;
  for (int q : order) {
    Refinement r = refine(hrrn, images[q], trimaps[q]);
    sal[q] = std::move(r.saliency);
    logvar[q] = std::move(r.logvar);
  }

  PipelineResult out;
  out.canonical_saliency = stitch(sal, layout);
  out.canonical_logvar = stitch_quadrants(logvar, layout.tile_size);
  out.saliency = stitch_to_original(sal, layout);
  out.trimap = resize_nearest(canonical_trimap, image.height(), image.width());
  out.canonical_trimap = std::move(canonical_trimap);
  return out;
}

double seam_ratio(const SaliencyMap& canvas) {
  const int h = canvas.height();
  const int w = canvas.width();
  if (h < 4 || w < 4 || h % 2 != 0 || w % 2 != 0) throw std::invalid_argument("seam_ratio: canvas must be even and >= 4");
  const int sy = h / 2;
  const int sx = w / 2;
  double seam = 0.0;
  double rest = 0.0;
  std::size_t n_seam = 0;
  std::size_t n_rest = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        const double d = std::abs(canvas.at(y, x + 1) - canvas.at(y, x));
        if (x + 1 == sx) { seam += d; ++n_seam; } else { rest += d; ++n_rest; }
      }
      if (y + 1 < h) {
        const double d = std::abs(canvas.at(y + 1, x) - canvas.at(y, x));
        if (y + 1 == sy) { seam += d; ++n_seam; } else { rest += d; ++n_rest; }
      }
    }
  }
  const double mean_rest = rest / static_cast<double>(n_rest);
  const double mean_seam = seam / static_cast<double>(n_seam);
  if (mean_rest == 0.0) return mean_seam == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return mean_seam / mean_rest;
}

}  // namespace dsod
