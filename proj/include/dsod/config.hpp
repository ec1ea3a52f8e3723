#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsod/hrrn.hpp"
#include "dsod/lrscn.hpp"

namespace dsod {

enum class Stage { kLrscn, kHrrn };
enum class Schedule { kLinear, kCosine };

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& name);

/// Optimisation settings shared by both stages.
struct OptimConfig {
  int steps = 2000;
  int batch_size = 8;
  double lr = 0.01;               // peak learning rate (heads for LRSCN)
  double backbone_lr_ratio = 0.1; // LRSCN backbone runs at lr * ratio
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int warmup_steps = 100;
  Schedule schedule = Schedule::kLinear;
  bool flip = true;
  int log_every = 10;
  double grad_clip = 0.0;  // max global gradient norm; 0 disables clipping

  void validate() const;
};

struct LrscnStageConfig {
  LrscnConfig model;
  OptimConfig optim;
  bool multiscale = true;
  std::vector<double> scales{0.75, 1.0, 1.25};
};

struct HrrnStageConfig {
  HrrnConfig model;
  OptimConfig optim;
  int canonical_size = 256;
  int tile_size = 128;
  bool use_uncertainty = true;
  int noise_kernel = 0;  // 0 trains on clean masks
};

struct AblationConfig {
  std::vector<int> kernels{3, 5, 7, 9, 11, 13};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int train_scenes = 200;
  int test_scenes = 20;
  int scene_size = 128;
};

struct TrainConfig {
  std::uint64_t seed = 0;
  LrscnStageConfig lrscn;
  HrrnStageConfig hrrn;
  AblationConfig ablation;

  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const LrscnConfig& cfg);
nlohmann::json to_json(const HrrnConfig& cfg);
LrscnConfig lrscn_config_from_json(const nlohmann::json& j);
HrrnConfig hrrn_config_from_json(const nlohmann::json& j);

/// Overlays `j` on the defaults. Keys absent from the defaults are rejected
/// with a ConfigError naming every offending dotted path.
TrainConfig config_from_json(const nlohmann::json& j);
TrainConfig load_config(const std::filesystem::path& path);

/// Applies `key=value` overrides. A key whose first segment is not a
/// top-level section is resolved inside `stage`'s section, so `steps=1`
/// means `lrscn.optim.steps` or `hrrn.optim.steps` when it names an
/// optimisation field and `lrscn.steps` style paths otherwise. Values are
/// parsed as JSON, falling back to a plain string.
TrainConfig apply_overrides(const TrainConfig& cfg, const std::vector<std::string>& overrides,
                            std::optional<Stage> stage = std::nullopt);

}  // namespace dsod
