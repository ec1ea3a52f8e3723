#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsod/raster.hpp"

namespace dsod {

struct DatasetRecord {
  Image image;
  BinaryMask mask;
  std::optional<BinaryMask> noisy_mask;
  std::string identifier;
};

using Dataset = std::vector<DatasetRecord>;

/// Per-scene seed and shape count used by synthesize_dataset; recorded in
/// the manifest so any scene can be regenerated on its own.
struct SceneSpec {
  std::string stem;
  std::uint64_t seed = 0;
  int n_shapes = 1;
};

std::vector<SceneSpec> plan_scenes(std::uint64_t seed, int count);

/// In-memory synthetic dataset; record i uses plan_scenes(seed, count)[i].
Dataset synthesize_dataset(std::uint64_t seed, int count, int size);

/// Writes images/<stem>.png, masks/<stem>.png and manifest.csv.
void write_dataset(const std::filesystem::path& dir, const Dataset& records,
                   const std::vector<SceneSpec>& specs);

/// Reads `images/*.png` + `masks/*.png` paired by stem, sorted by stem.
/// Images without a mask (and vice versa) are skipped; the skipped stems are
/// appended to `unmatched` when given. Throws IoError if `dir` is missing.
Dataset load_dataset(const std::filesystem::path& dir,
                     std::vector<std::string>* unmatched = nullptr);

/// Sorted stems of `*.png` files in a directory.
std::vector<std::string> png_stems(const std::filesystem::path& dir);

}  // namespace dsod
