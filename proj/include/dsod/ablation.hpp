#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "dsod/config.hpp"

namespace dsod {

inline constexpr const char* kArmL1 = "l1";
inline constexpr const char* kArmUncertainty = "l1+uncertainty";

/// One (kernel, arm, metric) measurement. Median rows carry no seed.
struct AblationRow {
  int kernel = 0;  // 0 = clean masks
  std::string arm;
  std::string metric;  // "bde" or "b_mu"
  double value = 0.0;
  std::uint64_t seed = 0;
};

struct AblationReport {
  std::vector<AblationRow> rows;     // kernels x arms x metrics x seeds
  std::vector<AblationRow> medians;  // kernels x arms x metrics
};

/// For every seed: synthesize train/test splits, train one LRSCN on clean
/// masks, then for each kernel corrupt the training masks and train both
/// HRRN arms from the same initialisation and data order. Each arm is scored
/// on the clean test split through the full tiled pipeline.
AblationReport ablate_noise(const TrainConfig& cfg, std::ostream* progress = nullptr);

/// Median over seeds of each (kernel, arm, metric) group.
std::vector<AblationRow> ablation_medians(const std::vector<AblationRow>& rows);

/// kernel,arm,metric,value,seed
void write_ablation_long_csv(const std::filesystem::path& path, const AblationReport& report);
/// seed,kernel,arm,bde,b_mu
void write_ablation_seed_csv(const std::filesystem::path& path, const AblationReport& report);
/// kernel,arm,metric,median
void write_ablation_median_csv(const std::filesystem::path& path, const AblationReport& report);

}  // namespace dsod
