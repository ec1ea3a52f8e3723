#include "dsod/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace dsod {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void on_png_error(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text != nullptr) *text = message;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

std::uint8_t quantize(float v) {
  const float clamped = std::clamp(v, 0.0F, 1.0F);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0F));
}

// The libpng read path uses setjmp, so no object with a non-trivial
// destructor may be live across png_read_* calls in this frame.
bool decode(std::FILE* file, RawPng& out, int& bit_depth, std::string& error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                           on_png_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  png_bytep* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete[] rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    bit_depth = 8;
  }
  if (bit_depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
  }
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.pixels.resize(stride * static_cast<std::size_t>(out.height));
  rows = new png_bytep[static_cast<std::size_t>(out.height)];
  for (int y = 0; y < out.height; ++y) {
    rows[y] = out.pixels.data() + stride * static_cast<std::size_t>(y);
  }
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  delete[] rows;
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode(std::FILE* file, const RawPng& in, std::string& error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, on_png_error,
                                            on_png_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  png_bytep* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete[] rows;
    png_destroy_write_struct(&png, &info);
    return false;
  }
  int color_type = PNG_COLOR_TYPE_GRAY;
  switch (in.channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    default: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(in.width), static_cast<png_uint_32>(in.height),
               8, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(in.width) * static_cast<std::size_t>(in.channels);
  rows = new png_bytep[static_cast<std::size_t>(in.height)];
  for (int y = 0; y < in.height; ++y) {
    rows[y] = const_cast<png_bytep>(in.pixels.data() + stride * static_cast<std::size_t>(y));
  }
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  delete[] rows;
  png_destroy_write_struct(&png, &info);
  return true;
}

RawPng read_single_channel(const std::filesystem::path& path, const char* what) {
  RawPng raw = read_png(path);
  if (raw.channels != 1) {
    throw IoError(IoErrorCode::kUnsupportedChannels,
                  std::string(what) + ": expected single-channel PNG, got " +
                      std::to_string(raw.channels) + " channels: " + path.string());
  }
  return raw;
}

}  // namespace

RawPng read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) {
    throw IoError(IoErrorCode::kNotFound, "cannot open PNG: " + path.string());
  }
  png_byte signature[8] = {};
  if (std::fread(signature, 1, sizeof(signature), file.get()) != sizeof(signature) ||
      png_sig_cmp(signature, 0, sizeof(signature)) != 0) {
    throw IoError(IoErrorCode::kCorrupt, "not a PNG file: " + path.string());
  }
  std::rewind(file.get());
  RawPng out;
  int bit_depth = 0;
  std::string error;
  if (!decode(file.get(), out, bit_depth, error)) {
    throw IoError(IoErrorCode::kCorrupt, "PNG decode failed (" + error + "): " + path.string());
  }
  if (bit_depth != 8) {
    throw IoError(IoErrorCode::kUnsupportedBitDepth,
                  "unsupported PNG bit depth " + std::to_string(bit_depth) + ": " + path.string());
  }
  return out;
}

void write_png(const std::filesystem::path& path, const RawPng& png) {
  if (png.channels < 1 || png.channels > 4 || png.height <= 0 || png.width <= 0 ||
      png.pixels.size() != static_cast<std::size_t>(png.height) *
                               static_cast<std::size_t>(png.width) *
                               static_cast<std::size_t>(png.channels)) {
    throw std::invalid_argument("write_png: inconsistent raster");
  }
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) {
    throw IoError(IoErrorCode::kWriteFailed, "cannot open for writing: " + path.string());
  }
  std::string error;
  if (!encode(file.get(), png, error)) {
    throw IoError(IoErrorCode::kWriteFailed, "PNG encode failed (" + error + "): " + path.string());
  }
}

Image load_image(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  if (raw.channels != 3) {
    throw IoError(IoErrorCode::kUnsupportedChannels,
                  "load_image: expected 3-channel PNG, got " + std::to_string(raw.channels) +
                      " channels: " + path.string());
  }
  std::vector<float> values(raw.pixels.size());
  std::transform(raw.pixels.begin(), raw.pixels.end(), values.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0F; });
  return Image(raw.height, raw.width, std::move(values));
}

void save_image(const Image& image, const std::filesystem::path& path) {
  RawPng raw{image.height(), image.width(), 3, {}};
  raw.pixels.resize(image.size());
  std::transform(image.values().begin(), image.values().end(), raw.pixels.begin(), quantize);
  write_png(path, raw);
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const RawPng raw = read_single_channel(path, "load_mask");
  BinaryMask mask(raw.height, raw.width);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = raw.pixels[i] >= 128 ? 1 : 0;
  return mask;
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  validate(mask);
  RawPng raw{mask.height(), mask.width(), 1, std::vector<std::uint8_t>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) raw.pixels[i] = mask[i] != 0 ? 255 : 0;
  write_png(path, raw);
}

std::uint8_t trimap_gray(std::uint8_t label) {
  switch (label) {
    case kBackground: return 0;
    case kUncertain: return 128;
    case kSalient: return 255;
    default: throw std::invalid_argument("trimap label out of range");
  }
}

std::uint8_t trimap_label(std::uint8_t gray) {
  if (gray < 64) return kBackground;
  if (gray < 192) return kUncertain;
  return kSalient;
}

void encode_trimap(const Trimap& trimap, const std::filesystem::path& path) {
  RawPng raw{trimap.height(), trimap.width(), 1, std::vector<std::uint8_t>(trimap.size())};
  for (std::size_t i = 0; i < trimap.size(); ++i) raw.pixels[i] = trimap_gray(trimap[i]);
  write_png(path, raw);
}

Trimap decode_trimap(const std::filesystem::path& path) {
  const RawPng raw = read_single_channel(path, "decode_trimap");
  Trimap trimap(raw.height, raw.width);
  for (std::size_t i = 0; i < trimap.size(); ++i) trimap[i] = trimap_label(raw.pixels[i]);
  return trimap;
}

SaliencyMap load_saliency(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  SaliencyMap map(raw.height, raw.width);
  const auto stride = static_cast<std::size_t>(raw.channels);
  for (std::size_t i = 0; i < map.size(); ++i) {
    map[i] = static_cast<float>(raw.pixels[i * stride]) / 255.0F;
  }
  return map;
}

void save_saliency(const SaliencyMap& map, const std::filesystem::path& path) {
  RawPng raw{map.height(), map.width(), 1, std::vector<std::uint8_t>(map.size())};
  for (std::size_t i = 0; i < map.size(); ++i) raw.pixels[i] = quantize(map[i]);
  write_png(path, raw);
}

}  // namespace dsod
