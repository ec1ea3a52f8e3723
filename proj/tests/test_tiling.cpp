#include <gtest/gtest.h>

#include <random>

#include "dsod/tiling.hpp"

using namespace dsod;

namespace {

LrscnConfig tiny_lrscn() {
  LrscnConfig cfg;
  cfg.backbone.stage_channels = {8, 8, 8, 8};
  cfg.backbone.stem_channels = 4;
  cfg.backbone.input_size = 32;
  cfg.decoder_channels = 8;
  return cfg;
}

HrrnConfig tiny_hrrn() {
  HrrnConfig cfg;
  cfg.depth = 2;
  cfg.base_channels = 4;
  cfg.input_shortcut_channels = 4;
  cfg.final_channels = 4;
  return cfg;
}

SaliencyMap random_map(std::mt19937& rng, int n) {
  SaliencyMap m(n, n);
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  for (auto& v : m.storage()) v = u(rng);
  return m;
}

}  // namespace

TEST(Tiling, SplitStitchIsIdentity) {
  std::mt19937 rng(1);
  for (int tile : {4, 16, 64}) {
    const SaliencyMap x = random_map(rng, 2 * tile);
    EXPECT_EQ(stitch_quadrants(split_quadrants(x, tile), tile), x);
    Trimap t(2 * tile, 2 * tile);
    for (auto& v : t.storage()) v = static_cast<std::uint8_t>(rng() % 3);
    EXPECT_EQ(stitch_quadrants(split_quadrants(t, tile), tile), t);
    TileLayout layout{2 * tile, tile, 2 * tile, 2 * tile};
    EXPECT_EQ(stitch(split_quadrants(x, tile), layout), x);
  }
}

TEST(Tiling, QuadrantOrderAndConstants) {
  const TileLayout layout{16, 8, 16, 16};
  std::array<SaliencyMap, 4> tiles{SaliencyMap(8, 8, 0.0F), SaliencyMap(8, 8, 0.25F), SaliencyMap(8, 8, 0.5F),
                                   SaliencyMap(8, 8, 0.75F)};
  const SaliencyMap canvas = stitch(tiles, layout);
  const float expected[4] = {0.0F, 0.25F, 0.5F, 0.75F};
  for (int q = 0; q < 4; ++q) {
    double sum = 0.0;
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) sum += canvas.at(quadrant_y(q, 8) + y, quadrant_x(q, 8) + x);
    }
    EXPECT_EQ(sum / 64.0, expected[q]);
  }
  EXPECT_EQ(canvas.at(0, 15), 0.25F);
  EXPECT_EQ(canvas.at(15, 0), 0.5F);
  const std::array<SaliencyMap, 4> zeros{SaliencyMap(8, 8), SaliencyMap(8, 8), SaliencyMap(8, 8), SaliencyMap(8, 8)};
  EXPECT_EQ(stitch(zeros, layout), SaliencyMap(16, 16));
  std::array<SaliencyMap, 4> wrong = zeros;
  wrong[2] = SaliencyMap(8, 7);
  EXPECT_THROW(stitch(wrong, layout), std::invalid_argument);
}

TEST(Tiling, PrepareResizesAndSplits) {
  const TileLayout layout{256, 128, 90, 70};
  const Image img(90, 70, 0.4F);
  Trimap t(90, 70);
  std::mt19937 rng(2);
  for (auto& v : t.storage()) v = static_cast<std::uint8_t>(rng() % 3);
  const auto tiles = prepare(img, t, layout);
  for (const auto& tile : tiles) {
    EXPECT_EQ(tile.image.height(), 128);
    EXPECT_EQ(tile.trimap.width(), 128);
    for (float v : tile.image.values()) EXPECT_FLOAT_EQ(v, 0.4F);
    for (auto v : tile.trimap.storage()) EXPECT_LE(v, 2);
  }
  EXPECT_THROW(prepare(img, Trimap(90, 71), layout), std::invalid_argument);
  EXPECT_THROW((TileLayout{256, 100, 90, 70}.validate()), std::invalid_argument);
  EXPECT_THROW((TileLayout{256, 128, 4, 70}.validate()), std::invalid_argument);
  EXPECT_THROW((TileLayout{40, 20, 90, 70}.validate(16)), std::invalid_argument);
}

TEST(Tiling, NearestResizeKeepsLabelSet) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Trimap t(9 + trial, 13 + 2 * trial);
    for (auto& v : t.storage()) v = static_cast<std::uint8_t>(rng() % 3);
    const auto resized = resize_nearest(t, 64, 64);
    for (auto v : resized.storage()) EXPECT_LE(v, 2);
  }
}

TEST(Pipeline, OutputDimsOrderInvarianceAndDeterminism) {
  torch::manual_seed(4);
  Lrscn lrscn(tiny_lrscn());
  Hrrn hrrn(tiny_hrrn());
  lrscn->eval();
  hrrn->eval();
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> dim(8, 90);
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  for (int trial = 0; trial < 5; ++trial) {
    const int h = dim(rng);
    const int w = dim(rng);
    Image img(h, w);
    for (auto& v : img.values()) v = u(rng);
    const PipelineResult a = run_pipeline(img, lrscn, hrrn, 32);
    EXPECT_EQ(a.saliency.height(), h);
    EXPECT_EQ(a.saliency.width(), w);
    EXPECT_EQ(a.trimap.height(), h);
    EXPECT_EQ(a.canonical_trimap.height(), 32);
    const PipelineResult b = run_pipeline(img, lrscn, hrrn, 32, {3, 1, 2, 0});
    EXPECT_EQ(a.saliency, b.saliency);
    EXPECT_EQ(a.canonical_logvar, b.canonical_logvar);
    EXPECT_EQ(run_pipeline(img, lrscn, hrrn, 32).saliency, a.saliency);
  }
}

TEST(Pipeline, SeamRatio) {
  EXPECT_EQ(seam_ratio(SaliencyMap(16, 16, 0.3F)), 0.0);
  const std::array<SaliencyMap, 4> tiles{SaliencyMap(8, 8, 0.0F), SaliencyMap(8, 8, 1.0F), SaliencyMap(8, 8, 1.0F),
                                         SaliencyMap(8, 8, 0.0F)};
  EXPECT_GT(seam_ratio(stitch_quadrants(tiles, 8)), 1.0);
}
