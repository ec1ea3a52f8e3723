#include "dsod/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "dsod/png_io.hpp"
#include "dsod/synthetic.hpp"

namespace dsod {

std::vector<SceneSpec> plan_scenes(std::uint64_t seed, int count) {
  std::vector<SceneSpec> specs;
  specs.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const std::uint64_t scene_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    char stem[32];
    std::snprintf(stem, sizeof(stem), "scene_%05d", i);
    specs.push_back({stem, scene_seed, 1 + static_cast<int>(scene_seed % 3)});
  }
  return specs;
}

Dataset synthesize_dataset(std::uint64_t seed, int count, int size) {
  Dataset out;
  for (const auto& spec : plan_scenes(seed, count)) {
    auto scene = gen_synthetic_scene(spec.seed, size, spec.n_shapes);
    out.push_back({std::move(scene.image), std::move(scene.mask), std::nullopt, spec.stem});
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& records,
                   const std::vector<SceneSpec>& specs) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  fs::create_directories(dir / "masks", ec);
  if (ec) {
    throw IoError(IoErrorCode::kWriteFailed, "cannot create dataset directory: " + dir.string());
  }
  for (const auto& r : records) {
    save_image(r.image, dir / "images" / (r.identifier + ".png"));
    save_mask(r.mask, dir / "masks" / (r.identifier + ".png"));
  }
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) {
    throw IoError(IoErrorCode::kWriteFailed, "cannot write manifest in " + dir.string());
  }
  manifest << "stem,seed,n_shapes\n";
  for (const auto& s : specs) manifest << s.stem << ',' << s.seed << ',' << s.n_shapes << '\n';
}

std::vector<std::string> png_stems(const std::filesystem::path& dir) {
  std::vector<std::string> stems;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      stems.push_back(entry.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

Dataset load_dataset(const std::filesystem::path& dir, std::vector<std::string>* unmatched) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir / "images") || !fs::is_directory(dir / "masks")) {
    throw IoError(IoErrorCode::kNotFound,
                  "dataset directory needs images/ and masks/: " + dir.string());
  }
  const auto image_stems = png_stems(dir / "images");
  const auto mask_stems = png_stems(dir / "masks");
  const std::set<std::string> masks(mask_stems.begin(), mask_stems.end());
  const std::set<std::string> images(image_stems.begin(), image_stems.end());

  Dataset out;
  for (const auto& stem : image_stems) {
    if (masks.count(stem) == 0) {
      if (unmatched != nullptr) unmatched->push_back(stem);
      continue;
    }
    DatasetRecord r{load_image(dir / "images" / (stem + ".png")),
                    load_mask(dir / "masks" / (stem + ".png")), std::nullopt, stem};
    require_same_shape(r.image, r.mask, "load_dataset");
    out.push_back(std::move(r));
  }
  if (unmatched != nullptr) {
    for (const auto& stem : mask_stems) {
      if (images.count(stem) == 0) unmatched->push_back(stem);
    }
  }
  return out;
}

}  // namespace dsod
