#include "dsod/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace dsod {
namespace {

using Rng = std::mt19937_64;
using Color = std::array<double, 3>;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Ellipse {
  double cx, cy, ax, ay, angle;

  bool contains(double x, double y) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double u = ((x - cx) * c + (y - cy) * s) / ax;
    const double v = (-(x - cx) * s + (y - cy) * c) / ay;
    return u * u + v * v <= 1.0;
  }
};

// Star-convex polygon: vertex i sits at angle 2*pi*i/n (+ jitter) and
// radius radii[i] around the centre.
struct StarPolygon {
  double cx, cy;
  std::vector<double> angles;
  std::vector<double> radii;

  bool contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    const double r = std::hypot(dx, dy);
    if (r == 0.0) return true;
    double theta = std::atan2(dy, dx);
    while (theta < angles.front()) theta += 2.0 * std::numbers::pi;
    while (theta >= angles.front() + 2.0 * std::numbers::pi) theta -= 2.0 * std::numbers::pi;
    const std::size_t n = angles.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double a0 = angles[i];
      const double a1 = i + 1 < n ? angles[i + 1] : angles[0] + 2.0 * std::numbers::pi;
      if (theta >= a0 && theta < a1) {
        // Intersect the ray with the edge between vertices i and i+1.
        const double x0 = radii[i] * std::cos(a0);
        const double y0 = radii[i] * std::sin(a0);
        const double x1 = radii[(i + 1) % n] * std::cos(a1);
        const double y1 = radii[(i + 1) % n] * std::sin(a1);
        const double ux = std::cos(theta);
        const double uy = std::sin(theta);
        const double ex = x1 - x0;
        const double ey = y1 - y0;
        const double denom = ux * ey - uy * ex;
        if (std::abs(denom) < 1e-12) return r <= radii[i];
        const double t = (x0 * ey - y0 * ex) / denom;
        return r <= t;
      }
    }
    return false;
  }
};

void paint_ellipse(BinaryMask& mask, Rng& rng, int size) {
  const Ellipse e{uniform(rng, 0.25, 0.75) * size, uniform(rng, 0.25, 0.75) * size,
                  uniform(rng, 0.08, 0.30) * size, uniform(rng, 0.08, 0.30) * size,
                  uniform(rng, 0.0, std::numbers::pi)};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (e.contains(x + 0.5, y + 0.5)) mask.at(y, x) = 1;
    }
  }
}

void paint_polygon(BinaryMask& mask, Rng& rng, int size) {
  StarPolygon p;
  p.cx = uniform(rng, 0.25, 0.75) * size;
  p.cy = uniform(rng, 0.25, 0.75) * size;
  const int n = std::uniform_int_distribution<int>(3, 7)(rng);
  const double base = uniform(rng, 0.12, 0.32) * size;
  const double offset = uniform(rng, -std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    const double jitter = uniform(rng, -0.25, 0.25) * 2.0 * std::numbers::pi / n;
    p.angles.push_back(offset + 2.0 * std::numbers::pi * i / n + jitter);
    p.radii.push_back(base * uniform(rng, 0.55, 1.0));
  }
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (p.contains(x + 0.5, y + 0.5)) mask.at(y, x) = 1;
    }
  }
}

Color random_color(Rng& rng) {
  return {uniform(rng, 0.05, 0.95), uniform(rng, 0.05, 0.95), uniform(rng, 0.05, 0.95)};
}

double contrast(const Color& a, const Color& b) {
  return (std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2])) / 3.0;
}

struct Wave {
  double fx, fy, phase, amplitude;
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double foreground_fraction(const BinaryMask& mask) {
  if (mask.empty()) return 0.0;
  std::size_t fg = 0;
  for (auto v : mask.values()) fg += v;
  return static_cast<double>(fg) / static_cast<double>(mask.size());
}

SyntheticScene gen_synthetic_scene(std::uint64_t seed, int size, int n_shapes) {
  if (size < 32) throw std::invalid_argument("gen_synthetic_scene: size must be >= 32");
  if (n_shapes < 1) throw std::invalid_argument("gen_synthetic_scene: n_shapes must be >= 1");

  Rng rng(seed);
  BinaryMask mask(size, size);
  bool accepted = false;
  for (int attempt = 0; attempt < 64 && !accepted; ++attempt) {
    std::fill(mask.storage().begin(), mask.storage().end(), 0);
    for (int s = 0; s < n_shapes; ++s) {
      if (uniform(rng, 0.0, 1.0) < 0.5) {
        paint_ellipse(mask, rng, size);
      } else {
        paint_polygon(mask, rng, size);
      }
    }
    const double frac = foreground_fraction(mask);
    accepted = frac >= kMinForegroundFraction && frac <= kMaxForegroundFraction;
  }
  if (!accepted) {
    // Centred disc of radius size/4 covers pi/16 ~ 0.196 of the frame.
    std::fill(mask.storage().begin(), mask.storage().end(), 0);
    const Ellipse disc{size / 2.0, size / 2.0, size / 4.0, size / 4.0, 0.0};
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) mask.at(y, x) = disc.contains(x + 0.5, y + 0.5) ? 1 : 0;
    }
  }

  const Color background = random_color(rng);
  Color foreground = random_color(rng);
  while (contrast(foreground, background) < 0.35) foreground = random_color(rng);

  std::array<Wave, 3> waves{};
  for (auto& w : waves) {
    w = {uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 3.0), uniform(rng, 0.0, 2.0 * std::numbers::pi),
         uniform(rng, 0.02, 0.06)};
  }
  const Wave fg_shade{uniform(rng, 0.3, 1.0), uniform(rng, 0.3, 1.0),
                      uniform(rng, 0.0, 2.0 * std::numbers::pi), 0.03};

  std::normal_distribution<double> noise(0.0, kSceneNoiseSigma);
  Image image(size, size);
  for (int y = 0; y < size; ++y) {
    const double v = static_cast<double>(y) / size;
    for (int x = 0; x < size; ++x) {
      const double u = static_cast<double>(x) / size;
      const bool fg = mask.at(y, x) != 0;
      double texture = 0.0;
      if (fg) {
        texture = fg_shade.amplitude *
                  std::sin(2.0 * std::numbers::pi * (fg_shade.fx * u + fg_shade.fy * v) + fg_shade.phase);
      } else {
        for (const auto& w : waves) {
          texture += w.amplitude * std::sin(2.0 * std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
        }
      }
      const Color& base = fg ? foreground : background;
      for (int c = 0; c < Image::kChannels; ++c) {
        const double value = base[static_cast<std::size_t>(c)] + texture + noise(rng);
        image.at(y, x, c) = static_cast<float>(std::clamp(value, 0.0, 1.0));
      }
    }
  }
  return {std::move(image), std::move(mask)};
}

}  // namespace dsod
