#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "dsod/checkpoint.hpp"
#include "dsod/config.hpp"
#include "dsod/dataset.hpp"
#include "dsod/hrrn.hpp"
#include "dsod/lrscn.hpp"

namespace dsod {

/// Non-finite loss during training.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Learning rate at 0-based `step`: linear warmup lr * (step + 1) / warmup,
/// then linear or cosine decay from lr towards 0 over the remaining steps.
double learning_rate(const OptimConfig& cfg, int step);

/// Produces the trimap for a training mask; the seed changes every epoch.
using TrimapSource = std::function<Trimap(const BinaryMask& mask, std::uint64_t seed)>;

struct TrainOptions {
  std::ostream* log = nullptr;  // line-delimited JSON records
  TrimapSource trimap_source;   // HRRN only; default random_trimap_from_mask
};

struct TrainingResult {
  Checkpoint checkpoint;
  std::vector<double> losses;  // one entry per step (skipped steps included)
  int degenerate_steps = 0;    // steps whose loss had no supervised pixels
};

TrainingResult train_lrscn(const TrainConfig& cfg, const Dataset& data, const TrainOptions& options = {});
TrainingResult train_hrrn(const TrainConfig& cfg, const Dataset& data, const TrainOptions& options = {});

/// Fills every record's noisy_mask with a random erode/dilate corruption of
/// side `kernel` (fixed per record, derived from `seed`).
void corrupt_dataset(Dataset& data, int kernel, std::uint64_t seed);

/// Rebuild a model from a checkpoint; throws CheckpointError on a kind or
/// shape mismatch. Models are returned in eval mode.
Lrscn load_lrscn(const Checkpoint& ckpt);
Hrrn load_hrrn(const Checkpoint& ckpt);

}  // namespace dsod
