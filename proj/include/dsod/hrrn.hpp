#pragma once

#include <vector>

#include <torch/torch.h>

#include "dsod/raster.hpp"
#include "dsod/spectral_norm.hpp"

namespace dsod {

struct HrrnConfig {
  int depth = 4;
  int base_channels = 32;      // doubles per encoder stage
  int input_shortcut_channels = 16;
  int final_channels = 32;
  int power_iterations = 1;
  bool overwrite_definite = false;  // post-processing only

  void validate() const;
  int divisor() const { return 1 << depth; }
};

/// [N, 1, H, W] each.
struct HrrnOutput {
  torch::Tensor saliency;
  torch::Tensor logvar;
};

/// Two spectral-normalized 3x3 convs with ReLU.
struct SnBlockImpl : torch::nn::Module {
  SnBlockImpl(int in, int out, int stride = 1);
  torch::Tensor forward(const torch::Tensor& x);

  SNConv2d first{nullptr}, second{nullptr};
};
TORCH_MODULE(SnBlock);

struct HrrnImpl : torch::nn::Module {
  explicit HrrnImpl(const HrrnConfig& cfg);

  /// `input` is [N, 6, H, W]: RGB followed by the one-hot trimap.
  /// Throws std::invalid_argument unless H and W are divisible by 2^depth.
  HrrnOutput forward(const torch::Tensor& input);

  /// Every spectral-normalized layer, in registration order.
  std::vector<SNConv2d> sn_layers();
  /// Freezes (or unfreezes) the singular-vector estimates of all layers.
  void freeze_spectral_state(bool frozen);

  HrrnConfig cfg;
  torch::nn::ModuleList encoder;    // SnBlock, stride 2 first conv
  SnBlock bottleneck{nullptr};
  torch::nn::ModuleList shortcuts;  // SnBlock per encoder stage
  torch::nn::ModuleList upconvs;    // SNConv2d per decoder stage
  SnBlock input_shortcut{nullptr};
  SNConv2d fuse{nullptr};
  SNConv2d saliency_head{nullptr};
  SNConv2d logvar_head{nullptr};
};
TORCH_MODULE(Hrrn);

/// [1, 6, H, W] network input for one image/trimap pair.
torch::Tensor hrrn_input(const Image& image, const Trimap& trimap);

struct Refinement {
  SaliencyMap saliency;
  UncertaintyMap logvar;
};

/// One-hot encodes the trimap and runs the network in inference mode.
/// With cfg.overwrite_definite, label 0/2 pixels are replaced by 0/1.
Refinement refine(Hrrn& model, const Image& image, const Trimap& trimap);

/// Applies the overwrite_definite post-processing to a saliency map.
void overwrite_definite(SaliencyMap& saliency, const Trimap& trimap);

}  // namespace dsod
