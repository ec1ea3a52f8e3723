#include "dsod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dsod {
namespace {

// Number of PR thresholds k/255 that `v` clears, minus one: the largest k
// with v >= k/255, or -1 if none.
int highest_cleared_level(float v) {
  int k = static_cast<int>(std::floor(static_cast<double>(v) * 255.0));
  k = std::clamp(k, -1, kPrLevels - 1);
  while (k + 1 < kPrLevels && static_cast<double>(v) >= (k + 1) / 255.0) ++k;
  while (k >= 0 && static_cast<double>(v) < k / 255.0) --k;
  return k;
}

void require_nonempty_truth(const BinaryMask& g, const char* what) {
  for (auto v : g.values()) {
    if (v != 0) return;
  }
  throw std::invalid_argument(std::string(what) + ": ground truth has no foreground");
}

struct Confusion {
  double tp = 0;
  double fp = 0;
  double fn = 0;
};

double precision_of(const Confusion& c) { return c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 1.0; }
double recall_of(const Confusion& c) { return c.tp + c.fn > 0 ? c.tp / (c.tp + c.fn) : 0.0; }

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d,
                           std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersect = [&](int q, int p) {
    return ((f[static_cast<std::size_t>(q)] + static_cast<double>(q) * q) -
            (f[static_cast<std::size_t>(p)] + static_cast<double>(p) * p)) /
           (2.0 * q - 2.0 * p);
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[static_cast<std::size_t>(k)]);
    // z[0] is -inf, so this stops at k = 0 at the latest.
    while (s <= z[static_cast<std::size_t>(k)]) {
      --k;
      s = intersect(q, v[static_cast<std::size_t>(k)]);
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] =
        static_cast<double>(q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

double directed_mean_distance(const BoundarySet& from, const BoundarySet& to, int h, int w) {
  const auto dist2 = squared_distance_to(to, h, w);
  double sum = 0.0;
  for (const auto& p : from.points) sum += std::sqrt(dist2.at(p.y, p.x));
  return sum / (2.0 * static_cast<double>(from.size()));
}

}  // namespace

double mae(const SaliencyMap& s, const BinaryMask& g) {
  require_same_shape(s, g, "mae");
  if (s.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sum += std::abs(static_cast<double>(s[i]) - static_cast<double>(g[i]));
  }
  return sum / static_cast<double>(s.size());
}

PrCurve pr_curve(const SaliencyMap& s, const BinaryMask& g) {
  require_same_shape(s, g, "pr_curve");
  require_nonempty_truth(g, "pr_curve");
  std::array<double, kPrLevels> pos_hist{};
  std::array<double, kPrLevels> neg_hist{};
  double total_pos = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total_pos += g[i];
    const int k = highest_cleared_level(s[i]);
    if (k < 0) continue;
    (g[i] != 0 ? pos_hist : neg_hist)[static_cast<std::size_t>(k)] += 1.0;
  }
  // A pixel clearing level k clears every lower level too.
  PrCurve curve;
  double tp = 0.0;
  double fp = 0.0;
  for (int k = kPrLevels - 1; k >= 0; --k) {
    const auto idx = static_cast<std::size_t>(k);
    tp += pos_hist[idx];
    fp += neg_hist[idx];
    const Confusion c{tp, fp, total_pos - tp};
    curve.thresholds[idx] = k / 255.0;
    curve.precision[idx] = precision_of(c);
    curve.recall[idx] = recall_of(c);
  }
  return curve;
}

double f_score(double precision, double recall) {
  const double denom = kBetaSquared * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + kBetaSquared) * precision * recall / denom;
}

double adaptive_threshold(const SaliencyMap& s) {
  double mean = 0.0;
  for (auto v : s.values()) mean += v;
  mean /= static_cast<double>(std::max<std::size_t>(s.size(), 1));
  return std::min(2.0 * mean, 1.0 - 1e-6);
}

double f_beta(const SaliencyMap& s, const BinaryMask& g, FMode mode) {
  require_same_shape(s, g, "f_beta");
  require_nonempty_truth(g, "f_beta");
  if (mode == FMode::kMax) {
    const PrCurve curve = pr_curve(s, g);
    double best = 0.0;
    for (int k = 0; k < kPrLevels; ++k) {
      const auto idx = static_cast<std::size_t>(k);
      best = std::max(best, f_score(curve.precision[idx], curve.recall[idx]));
    }
    return best;
  }
  const double threshold = adaptive_threshold(s);
  Confusion c;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool predicted = static_cast<double>(s[i]) >= threshold;
    const bool truth = g[i] != 0;
    c.tp += predicted && truth;
    c.fp += predicted && !truth;
    c.fn += !predicted && truth;
  }
  return f_score(precision_of(c), recall_of(c));
}

BoundarySet extract_boundary(const BinaryMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  auto background = [&](int y, int x) {
    return y < 0 || x < 0 || y >= h || x >= w || mask.at(y, x) == 0;
  };
  BoundarySet set;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(y, x) == 0) continue;
      if (background(y - 1, x) || background(y + 1, x) || background(y, x - 1) ||
          background(y, x + 1)) {
        set.points.push_back({x, y});
      }
    }
  }
  return set;
}

Plane<double, SaliencyTag> squared_distance_to(const BoundarySet& points, int height, int width) {
  // Large finite stand-in for "no site"; keeps the envelope arithmetic finite.
  constexpr double kFar = 1e20;
  Plane<double, SaliencyTag> grid(height, width, kFar);
  for (const auto& p : points.points) grid.at(p.y, p.x) = 0.0;
  const int n = std::max(height, width);
  std::vector<double> f(static_cast<std::size_t>(n));
  std::vector<double> d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  f.resize(static_cast<std::size_t>(height));
  d.resize(static_cast<std::size_t>(height));
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) f[static_cast<std::size_t>(y)] = grid.at(y, x);
    distance_transform_1d(f, d, v, z);
    for (int y = 0; y < height; ++y) grid.at(y, x) = d[static_cast<std::size_t>(y)];
  }
  f.resize(static_cast<std::size_t>(width));
  d.resize(static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) f[static_cast<std::size_t>(x)] = grid.at(y, x);
    distance_transform_1d(f, d, v, z);
    for (int x = 0; x < width; ++x) grid.at(y, x) = d[static_cast<std::size_t>(x)];
  }
  return grid;
}

double bde(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "bde");
  const BoundarySet x = extract_boundary(pred);
  const BoundarySet y = extract_boundary(gt);
  if (x.empty() || y.empty()) {
    throw std::invalid_argument("bde: undefined for an empty boundary set");
  }
  return directed_mean_distance(x, y, pred.height(), pred.width()) +
         directed_mean_distance(y, x, pred.height(), pred.width());
}

double bde(const SaliencyMap& pred, const BinaryMask& gt) { return bde(binarize(pred, 0.5F), gt); }

double b_mu(const EdgeMap& predicted, const EdgeMap& truth) {
  require_same_shape(predicted, truth, "b_mu");
  double overlap = 0.0;
  double energy = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double a = predicted[i];
    const double b = truth[i];
    overlap += a * b;
    energy += a * a + b * b;
  }
  if (energy == 0.0) return 0.0;
  return 1.0 - 2.0 * overlap / energy;
}

double b_mu(const SaliencyMap& s, const BinaryMask& g, const CannyConfig& config) {
  require_same_shape(s, g, "b_mu");
  return b_mu(canny_edges(s, config), canny_edges(g, config));
}

}  // namespace dsod
