#include <gtest/gtest.h>

#include <map>
#include <random>

#include "dsod/synthetic.hpp"
#include "dsod/trimap.hpp"
#include "oracles.hpp"

using namespace dsod;

namespace {

// Foreground pixels with an in-raster background 4-neighbour.
bool touches_background(const BinaryMask& m, int y, int x) {
  if (m.at(y, x) != 1) return false;
  const int dy[] = {-1, 1, 0, 0};
  const int dx[] = {0, 0, -1, 1};
  for (int i = 0; i < 4; ++i) {
    const int yy = y + dy[i];
    const int xx = x + dx[i];
    if (yy >= 0 && xx >= 0 && yy < m.height() && xx < m.width() && m.at(yy, xx) == 0) return true;
  }
  return false;
}

}  // namespace

TEST(Trimap, Examples) {
  const BinaryMask zeros(20, 20);
  const BinaryMask ones(20, 20, 1);
  for (int k : {3, 5, 13}) {
    EXPECT_EQ(trimap_from_mask(zeros, k), Trimap(20, 20, kBackground));
    EXPECT_EQ(trimap_from_mask(ones, k), Trimap(20, 20, kSalient));
  }
  const TrimapCounts c = count_labels(trimap_from_mask(oracle::centered_square(32, 9), 5));
  EXPECT_EQ(c.salient, 25U);
  EXPECT_EQ(c.uncertain, 13U * 13U - 25U);
  EXPECT_EQ(c.background, 32U * 32U - 169U);
  EXPECT_THROW(trimap_from_mask(ones, 4), std::invalid_argument);
  EXPECT_THROW(trimap_from_mask(ones, 1), std::invalid_argument);
}

TEST(Trimap, MatchesMorphologyOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask m = oracle::random_mask(rng, 24, 20);
    for (int k : {3, 5, 9}) {
      const Trimap t = trimap_from_mask(m, k);
      const BinaryMask e = oracle::erode(m, k);
      const BinaryMask d = oracle::dilate(m, k);
      for (int y = 0; y < 24; ++y) {
        for (int x = 0; x < 20; ++x) {
          const int expected = e.at(y, x) ? 2 : (d.at(y, x) ? 1 : 0);
          ASSERT_EQ(t.at(y, x), expected);
        }
      }
    }
  }
}

TEST(Trimap, RandomKernelIsDeterministicAndUniform) {
  const BinaryMask m = oracle::centered_square(40, 15);
  EXPECT_EQ(random_trimap_from_mask(m, 77), random_trimap_from_mask(m, 77));
  std::map<int, int> freq;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) ++freq[draw_trimap_kernel(seed)];
  ASSERT_EQ(freq.size(), kTrimapKernels.size());
  for (int k : kTrimapKernels) EXPECT_NEAR(freq[k] / 1000.0, 0.2, 0.05) << k;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(random_trimap_from_mask(BinaryMask(16, 16), seed), Trimap(16, 16, kBackground));
    EXPECT_EQ(random_trimap_from_mask(m, seed), trimap_from_mask(m, draw_trimap_kernel(seed)));
  }
}

TEST(Trimap, FromSaliency) {
  EXPECT_EQ(trimap_from_saliency(SaliencyMap(16, 16, 0.9F), 0.5F, 5), Trimap(16, 16, kSalient));
  EXPECT_EQ(trimap_from_saliency(SaliencyMap(16, 16, 0.1F), 0.5F, 5), Trimap(16, 16, kBackground));
  EXPECT_THROW(trimap_from_saliency(SaliencyMap(16, 16, 0.1F), 0.0F, 5), std::invalid_argument);
  EXPECT_THROW(trimap_from_saliency(SaliencyMap(16, 16, 0.1F), 1.0F, 5), std::invalid_argument);
}

TEST(Trimap, RampGivesVerticalBandAroundCrossing) {
  // Ramp crossing 0.5 between columns 15 and 16: foreground is x >= 16.
  const int w = 32;
  SaliencyMap s(24, w);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < w; ++x) s.at(y, x) = (static_cast<float>(x) + 0.5F) / w;
  }
  const Trimap t = trimap_from_saliency(s, 0.5F, 5);
  const Trimap expected = trimap_from_mask(binarize(s, 0.5F), 5);
  EXPECT_EQ(t, expected);
  // The brute-force band is dilate \ erode of the half-plane.
  const BinaryMask m = binarize(s, 0.5F);
  const BinaryMask e = oracle::erode(m, 5);
  const BinaryMask d = oracle::dilate(m, 5);
  int band_columns = 0;
  for (int x = 0; x < w; ++x) {
    const bool in_band = d.at(0, x) == 1 && e.at(0, x) == 0;
    band_columns += in_band;
    for (int y = 0; y < 24; ++y) EXPECT_EQ(t.at(y, x) == kUncertain, in_band) << x;
  }
  // Two columns on each side of the crossing.
  EXPECT_EQ(band_columns, 4);
  EXPECT_EQ(t.at(0, 13), kBackground);
  EXPECT_EQ(t.at(0, 14), kUncertain);
  EXPECT_EQ(t.at(0, 17), kUncertain);
  EXPECT_EQ(t.at(0, 18), kSalient);
}

TEST(TrimapProperty, PartitionCoverageNestingMonotonicity) {
  const std::vector<int> kernels{5, 7, 9, 11, 13};
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    const BinaryMask m = trial % 2 == 0 ? gen_synthetic_scene(trial, 32, 1 + trial % 3).mask
                                        : oracle::random_mask(rng, 16 + trial % 17, 16 + trial % 13);
    std::size_t prev_uncertain = 0;
    Trimap prev;
    for (int k : kernels) {
      const Trimap t = trimap_from_mask(m, k);
      const TrimapCounts c = count_labels(t);
      ASSERT_EQ(c.background + c.uncertain + c.salient, m.size());
      for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
          const auto label = t.at(y, x);
          ASSERT_LE(label, 2);
          if (touches_background(m, y, x)) ASSERT_EQ(label, kUncertain);
          if (label == kSalient) ASSERT_EQ(m.at(y, x), 1);
          if (label == kBackground) ASSERT_EQ(m.at(y, x), 0);
          if (!prev.empty() && prev.at(y, x) == kUncertain) ASSERT_EQ(label, kUncertain);
        }
      }
      ASSERT_GE(c.uncertain, prev_uncertain);
      prev_uncertain = c.uncertain;
      prev = t;
    }
  }
}

TEST(Trimap, InteriorBoundaryIgnoresFrame) {
  const BinaryMask ones(6, 6, 1);
  EXPECT_EQ(interior_boundary(ones), BinaryMask(6, 6));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const BinaryMask m = oracle::random_mask(rng, 14, 14);
    const BinaryMask b = interior_boundary(m);
    for (int y = 0; y < 14; ++y) {
      for (int x = 0; x < 14; ++x) EXPECT_EQ(b.at(y, x) == 1, touches_background(m, y, x));
    }
  }
}
