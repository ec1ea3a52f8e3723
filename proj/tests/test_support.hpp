#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <unistd.h>

#include "dsod/config.hpp"

namespace testing_support {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dsod_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

/// Small models and short runs so that training paths execute in seconds.
inline dsod::TrainConfig tiny_config() {
  dsod::TrainConfig cfg = dsod::config_from_json(nlohmann::json::object());
  cfg.lrscn.model.backbone.stage_channels = {8, 8, 8, 8};
  cfg.lrscn.model.backbone.stem_channels = 4;
  cfg.lrscn.model.backbone.input_size = 32;
  cfg.lrscn.model.decoder_channels = 8;
  cfg.lrscn.multiscale = false;
  cfg.lrscn.scales = {1.0};
  cfg.lrscn.optim.steps = 3;
  cfg.lrscn.optim.batch_size = 2;
  cfg.lrscn.optim.warmup_steps = 1;
  cfg.lrscn.optim.log_every = 1;
  cfg.hrrn.model.depth = 2;
  cfg.hrrn.model.base_channels = 4;
  cfg.hrrn.model.input_shortcut_channels = 4;
  cfg.hrrn.model.final_channels = 4;
  cfg.hrrn.canonical_size = 32;
  cfg.hrrn.tile_size = 16;
  cfg.hrrn.optim.steps = 3;
  cfg.hrrn.optim.batch_size = 2;
  cfg.hrrn.optim.warmup_steps = 1;
  cfg.hrrn.optim.log_every = 1;
  cfg.ablation.train_scenes = 4;
  cfg.ablation.test_scenes = 2;
  cfg.ablation.scene_size = 32;
  cfg.validate();
  return cfg;
}

inline std::string to_json_text(const dsod::TrainConfig& cfg) { return dsod::to_json(cfg).dump(2); }

}  // namespace testing_support
