#pragma once

#include <array>
#include <vector>

#include <torch/torch.h>

#include "dsod/raster.hpp"

namespace dsod {

struct BackboneConfig {
  std::array<int, 4> stage_channels{32, 64, 128, 128};  // F3..F6, each even
  int input_size = 128;
  std::array<int, 4> stage_strides{4, 8, 16, 32};  // doubling, first a power of two >= 2
  int stem_channels = 16;

  void validate() const;
  /// Total downsampling of the deepest stage.
  int max_stride() const { return stage_strides[3]; }
};

struct GcnSchedule {
  std::array<std::vector<int>, 4> kernels_per_level{
      std::vector<int>{7, 11, 15}, std::vector<int>{7, 11, 15}, std::vector<int>{7, 11}, std::vector<int>{7}};

  void validate() const;
};

struct LrscnConfig {
  BackboneConfig backbone;
  GcnSchedule gcn;
  int decoder_channels = 64;

  void validate() const;
};

/// Saliency maps are [N, 1, h, w] probabilities; logits are [N, 3, h3, w3].
struct LrscnOutput {
  std::array<torch::Tensor, 4> saliency_levels;  // D3..D6, finest first; D3 is the SGA map
  torch::Tensor trimap_logits;
  torch::Tensor refined_saliency;
};

/// conv (no bias) + per-channel batch norm + ReLU.
struct ConvBnReluImpl : torch::nn::Module {
  ConvBnReluImpl(int in, int out, int kernel, int stride = 1);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv{nullptr};
  torch::nn::BatchNorm2d bn{nullptr};
};
TORCH_MODULE(ConvBnRelu);

struct BackboneImpl : torch::nn::Module {
  explicit BackboneImpl(const BackboneConfig& cfg);
  /// [F3, F4, F5, F6]. Throws std::invalid_argument unless H and W are
  /// divisible by the deepest stride.
  std::array<torch::Tensor, 4> forward(const torch::Tensor& image);

  BackboneConfig cfg;
  torch::nn::Sequential stem{nullptr};
  std::array<torch::nn::Sequential, 4> stages{nullptr, nullptr, nullptr, nullptr};
};
TORCH_MODULE(Backbone);

/// Large-kernel block: (k x 1 then 1 x k) + (1 x k then k x 1).
struct GcnImpl : torch::nn::Module {
  GcnImpl(int channels, int kernel);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d a1{nullptr}, a2{nullptr}, b1{nullptr}, b2{nullptr};
};
TORCH_MODULE(Gcn);

struct MecfImpl : torch::nn::Module {
  MecfImpl(int low_channels, int high_channels, const std::vector<int>& kernels);
  /// Output has f_l's shape.
  torch::Tensor forward(const torch::Tensor& f_l, const torch::Tensor& f_h);

  int half = 0;
  ConvBnRelu me_down{nullptr};
  torch::nn::ModuleList me_gcn;
  ConvBnRelu cf_compress{nullptr}, cf_conv1{nullptr}, cf_conv2{nullptr}, cf_align{nullptr};
};
TORCH_MODULE(Mecf);

struct DecoderImpl : torch::nn::Module {
  DecoderImpl(const std::array<int, 4>& in_channels, int channels);
  /// [D3..D6] features at the MECF resolutions.
  std::array<torch::Tensor, 4> forward(const std::array<torch::Tensor, 4>& mecf);

  std::array<ConvBnRelu, 4> fuse{nullptr, nullptr, nullptr, nullptr};
  std::array<torch::nn::Conv2d, 3> heads{nullptr, nullptr, nullptr};  // D4..D6 saliency heads
};
TORCH_MODULE(Decoder);

struct SgaOutput {
  torch::Tensor saliency;
  torch::Tensor refined;
  torch::Tensor trimap_logits;
};

struct SgaImpl : torch::nn::Module {
  explicit SgaImpl(int channels);
  SgaOutput forward(const torch::Tensor& d3);

  torch::nn::Conv2d saliency_head{nullptr}, trimap_head{nullptr};
};
TORCH_MODULE(Sga);

struct LrscnImpl : torch::nn::Module {
  explicit LrscnImpl(const LrscnConfig& cfg);
  LrscnOutput forward(const torch::Tensor& image);

  /// Parameters owned by the backbone (trained at a reduced learning rate).
  std::vector<torch::Tensor> backbone_parameters();
  std::vector<torch::Tensor> head_parameters();

  LrscnConfig cfg;
  Backbone backbone{nullptr};
  std::array<Mecf, 4> mecf{nullptr, nullptr, nullptr, nullptr};
  Decoder decoder{nullptr};
  Sga sga{nullptr};
};
TORCH_MODULE(Lrscn);

/// Argmax over the three logits of one image ([3, h, w] or [1, 3, h, w]),
/// ties resolved toward label 1 and then toward label 0, followed by a
/// nearest-neighbour upsample to (height, width).
Trimap predict_trimap(const torch::Tensor& trimap_logits, int height, int width);
Trimap predict_trimap(const LrscnOutput& output, int height, int width);

/// Bilinear (align_corners = false) resize of an [N, C, h, w] tensor.
torch::Tensor upsample_to(const torch::Tensor& x, int64_t height, int64_t width);

}  // namespace dsod
