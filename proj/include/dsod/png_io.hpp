#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsod/raster.hpp"

namespace dsod {

enum class IoErrorCode {
  kNotFound,
  kUnsupportedBitDepth,
  kUnsupportedChannels,
  kCorrupt,
  kWriteFailed,
};

class IoError : public std::runtime_error {
 public:
  IoError(IoErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  IoErrorCode code() const { return code_; }

 private:
  IoErrorCode code_;
};

/// Decoded 8-bit PNG before any domain interpretation.
struct RawPng {
  int height = 0;
  int width = 0;
  int channels = 0;  // 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA
  std::vector<std::uint8_t> pixels;  // interleaved, row-major
};

/// Throws IoError; 16-bit and palette-free sub-8-bit files are rejected with
/// kUnsupportedBitDepth. Palette images are expanded to RGB.
RawPng read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RawPng& png);

/// 8-bit RGB only; values = raw / 255.
Image load_image(const std::filesystem::path& path);
/// Rounds to the nearest 8-bit level.
void save_image(const Image& image, const std::filesystem::path& path);

/// 8-bit single channel only; raw >= 128 -> 1.
BinaryMask load_mask(const std::filesystem::path& path);
/// 0 -> 0, 1 -> 255.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// Labels {0,1,2} <-> gray {0,128,255}.
void encode_trimap(const Trimap& trimap, const std::filesystem::path& path);
/// Gray [0,64) -> 0, [64,192) -> 1, [192,256) -> 2.
Trimap decode_trimap(const std::filesystem::path& path);

/// Grayscale saliency map; values = raw / 255. RGB files are accepted and
/// reduced to their first channel.
SaliencyMap load_saliency(const std::filesystem::path& path);
void save_saliency(const SaliencyMap& map, const std::filesystem::path& path);

std::uint8_t trimap_gray(std::uint8_t label);
std::uint8_t trimap_label(std::uint8_t gray);

}  // namespace dsod
