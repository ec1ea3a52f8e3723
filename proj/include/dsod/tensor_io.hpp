#pragma once

#include <torch/torch.h>

#include "dsod/raster.hpp"

namespace dsod {

// Rasters <-> tensors. Produced tensors are CPU float32 (labels int64) and
// carry no batch dimension unless stated.

/// [3, H, W]
torch::Tensor to_tensor(const Image& image);
/// [1, H, W] with values 0/1.
torch::Tensor to_tensor(const BinaryMask& mask);
/// [1, H, W]
torch::Tensor to_tensor(const SaliencyMap& map);
/// [H, W] int64 labels.
torch::Tensor to_tensor(const Trimap& trimap);
/// [3, H, W] one-hot encoding of the labels.
torch::Tensor one_hot(const Trimap& trimap);

/// Accept [H, W], [1, H, W] or [1, 1, H, W].
SaliencyMap saliency_from_tensor(const torch::Tensor& t);
UncertaintyMap logvar_from_tensor(const torch::Tensor& t);
Trimap trimap_from_tensor(const torch::Tensor& labels);
Image image_from_tensor(const torch::Tensor& chw);

/// Stack per-sample tensors along a new leading batch dimension.
torch::Tensor batch(const std::vector<torch::Tensor>& items);

}  // namespace dsod
