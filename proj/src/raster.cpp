#include "dsod/raster.hpp"

#include <algorithm>
#include <cmath>

namespace dsod {

Image::Image(int height, int width, float fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw std::invalid_argument("Image: negative dims");
  data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * kChannels,
               fill);
}

Image::Image(int height, int width, std::vector<float> rgb)
    : height_(height), width_(width), data_(std::move(rgb)) {
  if (height < 0 || width < 0 ||
      data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * kChannels) {
    throw std::invalid_argument("Image: data size does not match dims");
  }
}

namespace {

template <typename Range, typename Pred>
void check_all(const Range& values, Pred ok, const char* message) {
  for (auto v : values) {
    if (!ok(v)) throw std::invalid_argument(message);
  }
}

bool unit_interval(float v) { return std::isfinite(v) && v >= 0.0F && v <= 1.0F; }

// Shared kernel for single- and multi-channel bilinear resampling.
struct Tap {
  int lo;
  int hi;
  float frac;
};

std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::max(src, 0.0);
    const int lo = std::min(static_cast<int>(src), in - 1);
    const int hi = std::min(lo + 1, in - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, static_cast<float>(src - lo)};
  }
  return taps;
}

template <typename Fetch, typename Store>
void resample(int in_h, int in_w, int out_h, int out_w, int channels, Fetch fetch, Store store) {
  if (in_h <= 0 || in_w <= 0 || out_h <= 0 || out_w <= 0) {
    throw std::invalid_argument("resize_bilinear: degenerate size");
  }
  const auto ty = bilinear_taps(in_h, out_h);
  const auto tx = bilinear_taps(in_w, out_w);
  for (int y = 0; y < out_h; ++y) {
    const Tap& a = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      const Tap& b = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < channels; ++c) {
        const float top = fetch(a.lo, b.lo, c) * (1.0F - b.frac) + fetch(a.lo, b.hi, c) * b.frac;
        const float bottom = fetch(a.hi, b.lo, c) * (1.0F - b.frac) + fetch(a.hi, b.hi, c) * b.frac;
        store(y, x, c, top * (1.0F - a.frac) + bottom * a.frac);
      }
    }
  }
}

template <typename P>
P resize_plane(const P& map, int height, int width) {
  P out(height, width);
  resample(
      map.height(), map.width(), height, width, 1,
      [&](int y, int x, int) { return map.at(y, x); },
      [&](int y, int x, int, float v) { out.at(y, x) = v; });
  return out;
}

}  // namespace

void validate(const Image& image) {
  if (image.height() < 8 || image.width() < 8) {
    throw std::invalid_argument("Image: height and width must be >= 8");
  }
  check_all(image.values(), unit_interval, "Image: values must be finite and in [0,1]");
}

void validate(const BinaryMask& mask) {
  check_all(mask.values(), [](std::uint8_t v) { return v <= 1; },
            "BinaryMask: values must be 0 or 1");
}

void validate(const SaliencyMap& map) {
  check_all(map.values(), unit_interval, "SaliencyMap: values must be finite and in [0,1]");
}

void validate(const Trimap& trimap) {
  check_all(trimap.values(), [](std::uint8_t v) { return v <= kSalient; },
            "Trimap: labels must be in {0,1,2}");
}

void validate(const UncertaintyMap& logvar) {
  check_all(logvar.values(), [](float v) { return std::isfinite(v); },
            "UncertaintyMap: values must be finite");
}

BinaryMask binarize(const SaliencyMap& map, float threshold) {
  BinaryMask out(map.height(), map.width());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = map[i] >= threshold ? 1 : 0;
  return out;
}

SaliencyMap to_saliency(const BinaryMask& mask) {
  SaliencyMap out(mask.height(), mask.width());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] != 0 ? 1.0F : 0.0F;
  return out;
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (image.height() == height && image.width() == width) return image;
  Image out(height, width);
  resample(
      image.height(), image.width(), height, width, Image::kChannels,
      [&](int y, int x, int c) { return image.at(y, x, c); },
      [&](int y, int x, int c, float v) { out.at(y, x, c) = v; });
  return out;
}

SaliencyMap resize_bilinear(const SaliencyMap& map, int height, int width) {
  if (map.same_shape(height, width)) return map;
  return resize_plane(map, height, width);
}

UncertaintyMap resize_bilinear(const UncertaintyMap& map, int height, int width) {
  if (map.same_shape(height, width)) return map;
  return resize_plane(map, height, width);
}

Image flip_horizontal(const Image& image) {
  Image out(image.height(), image.width());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < Image::kChannels; ++c) {
        out.at(y, x, c) = image.at(y, image.width() - 1 - x, c);
      }
    }
  }
  return out;
}

Image crop(const Image& image, int y0, int x0, int height, int width) {
  if (y0 < 0 || x0 < 0 || y0 + height > image.height() || x0 + width > image.width()) {
    throw std::invalid_argument("crop: window outside raster");
  }
  Image out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < Image::kChannels; ++c) out.at(y, x, c) = image.at(y0 + y, x0 + x, c);
    }
  }
  return out;
}

}  // namespace dsod
