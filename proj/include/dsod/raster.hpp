#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsod {

/// Row-major single-channel raster. The tag parameter keeps masks, trimaps
/// and continuous maps from being mixed up at API boundaries.
template <typename T, typename Tag>
class Plane {
 public:
  using value_type = T;

  Plane() = default;
  Plane(int height, int width, T fill = T{})
      : height_(height), width_(width),
        data_(checked_area(height, width), fill) {}
  Plane(int height, int width, std::vector<T> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (data_.size() != checked_area(height, width)) {
      throw std::invalid_argument("Plane: data size does not match dims");
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int y, int x) { return data_[index(y, x)]; }
  const T& at(int y, int x) const { return data_[index(y, x)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  bool same_shape(int h, int w) const { return h == height_ && w == width_; }
  template <typename U, typename G>
  bool same_shape(const Plane<U, G>& other) const {
    return same_shape(other.height(), other.width());
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  static std::size_t checked_area(int h, int w) {
    if (h < 0 || w < 0) throw std::invalid_argument("Plane: negative dims");
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  std::size_t index(int y, int x) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

struct MaskTag {};
struct SaliencyTag {};
struct TrimapTag {};
struct LogVarTag {};

/// Values exactly 0 or 1.
using BinaryMask = Plane<std::uint8_t, MaskTag>;
/// Values in [0,1].
using SaliencyMap = Plane<float, SaliencyTag>;
/// Labels 0 = background, 1 = uncertain, 2 = salient.
using Trimap = Plane<std::uint8_t, TrimapTag>;
/// Per-pixel log-variance s = log sigma^2.
using UncertaintyMap = Plane<float, LogVarTag>;

enum TrimapLabel : std::uint8_t {
  kBackground = 0,
  kUncertain = 1,
  kSalient = 2,
};

/// H x W x 3 raster in [0,1], channels interleaved (RGB).
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, float fill = 0.0F);
  Image(int height, int width, std::vector<float> rgb);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  float& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  float at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * kChannels + static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// Invariant checks. Each throws std::invalid_argument naming the violation.
void validate(const Image& image);
void validate(const BinaryMask& mask);
void validate(const SaliencyMap& map);
void validate(const Trimap& trimap);
void validate(const UncertaintyMap& logvar);

/// Throws std::invalid_argument unless both rasters have the same dims.
template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" +
                                std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                                " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + ")");
  }
}

/// s >= threshold -> 1.
BinaryMask binarize(const SaliencyMap& map, float threshold);
SaliencyMap to_saliency(const BinaryMask& mask);

// Resampling. Bilinear uses half-pixel centres (align_corners = false) with
// edge clamping; nearest picks src = floor(dst * in / out). Nearest never
// introduces values that are not present in the input.
Image resize_bilinear(const Image& image, int height, int width);
SaliencyMap resize_bilinear(const SaliencyMap& map, int height, int width);
UncertaintyMap resize_bilinear(const UncertaintyMap& map, int height, int width);

template <typename T, typename Tag>
Plane<T, Tag> resize_nearest(const Plane<T, Tag>& src, int height, int width) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("resize_nearest: degenerate size");
  Plane<T, Tag> out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = static_cast<int>(static_cast<std::int64_t>(y) * src.height() / height);
    for (int x = 0; x < width; ++x) {
      const int sx = static_cast<int>(static_cast<std::int64_t>(x) * src.width() / width);
      out.at(y, x) = src.at(sy, sx);
    }
  }
  return out;
}

/// Mirror along the vertical axis.
Image flip_horizontal(const Image& image);
template <typename T, typename Tag>
Plane<T, Tag> flip_horizontal(const Plane<T, Tag>& src) {
  Plane<T, Tag> out(src.height(), src.width());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) out.at(y, x) = src.at(y, src.width() - 1 - x);
  }
  return out;
}

/// Copies the [y0, y0+h) x [x0, x0+w) window.
Image crop(const Image& image, int y0, int x0, int height, int width);
template <typename T, typename Tag>
Plane<T, Tag> crop(const Plane<T, Tag>& src, int y0, int x0, int height, int width) {
  if (y0 < 0 || x0 < 0 || y0 + height > src.height() || x0 + width > src.width()) {
    throw std::invalid_argument("crop: window outside raster");
  }
  Plane<T, Tag> out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out.at(y, x) = src.at(y0 + y, x0 + x);
  }
  return out;
}

}  // namespace dsod
