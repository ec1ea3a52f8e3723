#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dsod/metrics.hpp"

namespace dsod {
namespace {

using Field = Plane<double, SaliencyTag>;

std::vector<double> gaussian_taps(double sigma, int size) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("canny: blur size must be odd");
  if (!(sigma > 0.0)) throw std::invalid_argument("canny: sigma must be positive");
  std::vector<double> taps(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + r)] = w;
    sum += w;
  }
  for (auto& w : taps) w /= sum;
  return taps;
}

Field blur(const Field& in, const std::vector<double>& taps) {
  const int h = in.height();
  const int w = in.width();
  const int r = static_cast<int>(taps.size()) / 2;
  Field tmp(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += taps[static_cast<std::size_t>(i + r)] * in.at(y, std::clamp(x + i, 0, w - 1));
      }
      tmp.at(y, x) = acc;
    }
  }
  Field out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += taps[static_cast<std::size_t>(i + r)] * tmp.at(std::clamp(y + i, 0, h - 1), x);
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

EdgeMap canny(const Field& raster, const CannyConfig& config) {
  const int h = raster.height();
  const int w = raster.width();
  EdgeMap edges(h, w);
  if (h == 0 || w == 0) return edges;

  const Field smooth = blur(raster, gaussian_taps(config.sigma, config.blur_size));
  auto px = [&](int y, int x) { return smooth.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1)); };

  Field magnitude(h, w);
  Plane<std::uint8_t, EdgeTag> sector(h, w);
  double peak = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
      const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
      const double m = std::hypot(gx, gy);
      magnitude.at(y, x) = m;
      peak = std::max(peak, m);
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      std::uint8_t s = 0;
      if (angle >= 22.5 && angle < 67.5) {
        s = 1;
      } else if (angle >= 67.5 && angle < 112.5) {
        s = 2;
      } else if (angle >= 112.5 && angle < 157.5) {
        s = 3;
      }
      sector.at(y, x) = s;
    }
  }
  if (peak <= 1e-12) return edges;

  // Step along the quantised gradient direction (y grows downwards).
  static constexpr int kStep[4][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1}};
  auto mag = [&](int y, int x) {
    return (y < 0 || x < 0 || y >= h || x >= w) ? 0.0 : magnitude.at(y, x);
  };
  const double low = config.low_ratio * peak;
  const double high = config.high_ratio * peak;
  // 0 = suppressed, 1 = weak, 2 = strong.
  Plane<std::uint8_t, EdgeTag> klass(h, w);
  std::vector<Pixel> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = magnitude.at(y, x);
      if (m < low) continue;
      const auto* d = kStep[sector.at(y, x)];
      const double forward = mag(y + d[0], x + d[1]);
      const double backward = mag(y - d[0], x - d[1]);
      // Strict on one side so a symmetric two-pixel ridge keeps one pixel.
      if (!(m > backward && m >= forward)) continue;
      klass.at(y, x) = m >= high ? 2 : 1;
      if (m >= high) {
        edges.at(y, x) = 1;
        stack.push_back({x, y});
      }
    }
  }
  while (!stack.empty()) {
    const Pixel p = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int ny = p.y + dy;
        const int nx = p.x + dx;
        if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
        if (klass.at(ny, nx) == 1 && edges.at(ny, nx) == 0) {
          edges.at(ny, nx) = 1;
          stack.push_back({nx, ny});
        }
      }
    }
  }
  return edges;
}

}  // namespace

EdgeMap canny_edges(const SaliencyMap& raster, const CannyConfig& config) {
  Field field(raster.height(), raster.width());
  for (std::size_t i = 0; i < raster.size(); ++i) field[i] = raster[i];
  return canny(field, config);
}

EdgeMap canny_edges(const BinaryMask& mask, const CannyConfig& config) {
  Field field(mask.height(), mask.width());
  for (std::size_t i = 0; i < mask.size(); ++i) field[i] = mask[i];
  return canny(field, config);
}

}  // namespace dsod
