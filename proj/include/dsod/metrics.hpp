#pragma once

#include <array>
#include <vector>

#include "dsod/raster.hpp"

namespace dsod {

inline constexpr double kBetaSquared = 0.3;
inline constexpr int kPrLevels = 256;

/// Mean |s - g| over all pixels.
double mae(const SaliencyMap& s, const BinaryMask& g);

/// Precision / recall of s >= k/255 for k = 0..255. Precision is 1 where
/// nothing is predicted positive.
struct PrCurve {
  std::array<double, kPrLevels> thresholds{};
  std::array<double, kPrLevels> precision{};
  std::array<double, kPrLevels> recall{};
};

PrCurve pr_curve(const SaliencyMap& s, const BinaryMask& g);

/// (1 + b^2) P R / (b^2 P + R) with b^2 = 0.3; 0 when P = R = 0.
double f_score(double precision, double recall);

enum class FMode {
  kAdaptive,  // threshold min(2 * mean(s), 1 - 1e-6)
  kMax,       // best of the 256 PR thresholds
};

double f_beta(const SaliencyMap& s, const BinaryMask& g, FMode mode);
double adaptive_threshold(const SaliencyMap& s);

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Foreground pixels with at least one background 4-neighbour, counting
/// out-of-raster neighbours as background. Row-major order.
struct BoundarySet {
  std::vector<Pixel> points;
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

BoundarySet extract_boundary(const BinaryMask& mask);

/// Symmetric boundary displacement error. Throws std::invalid_argument if
/// either boundary set is empty.
double bde(const BinaryMask& pred, const BinaryMask& gt);
/// Binarizes the prediction at 0.5 first.
double bde(const SaliencyMap& pred, const BinaryMask& gt);

/// Squared Euclidean distance from every pixel to the nearest pixel of
/// `points`; exact integers held in doubles.
Plane<double, SaliencyTag> squared_distance_to(const BoundarySet& points, int height, int width);

struct EdgeTag {};
using EdgeMap = Plane<std::uint8_t, EdgeTag>;

struct CannyConfig {
  double sigma = 1.4;
  int blur_size = 5;
  double low_ratio = 0.1;   // of the maximum gradient magnitude
  double high_ratio = 0.2;
};

/// Gaussian blur, Sobel gradients, non-maximum suppression, double threshold
/// and 8-connected hysteresis. Constant input yields an empty map.
EdgeMap canny_edges(const SaliencyMap& raster, const CannyConfig& config = {});
EdgeMap canny_edges(const BinaryMask& mask, const CannyConfig& config = {});

/// 1 - 2 sum(gs * gy) / sum(gs^2 + gy^2); 0 when both maps are empty.
double b_mu(const EdgeMap& predicted, const EdgeMap& truth);
double b_mu(const SaliencyMap& s, const BinaryMask& g, const CannyConfig& config = {});

}  // namespace dsod
