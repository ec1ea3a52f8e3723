#include "dsod/lrscn.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dsod {
namespace {

namespace F = torch::nn::functional;

torch::nn::Conv2d conv(int in, int out, int kh, int kw, bool bias = true) {
  return torch::nn::Conv2d(
      torch::nn::Conv2dOptions(in, out, {kh, kw}).padding({kh / 2, kw / 2}).bias(bias));
}

}  // namespace

void BackboneConfig::validate() const {
  for (int c : stage_channels) {
    if (c < 2 || c % 2 != 0) throw std::invalid_argument("BackboneConfig: stage channels must be even and >= 2");
  }
  if (stem_channels < 1) throw std::invalid_argument("BackboneConfig: stem_channels must be positive");
  const int first = stage_strides[0];
  if (first < 2 || (first & (first - 1)) != 0) {
    throw std::invalid_argument("BackboneConfig: first stride must be a power of two >= 2");
  }
  for (int i = 1; i < 4; ++i) {
    if (stage_strides[i] != 2 * stage_strides[i - 1]) {
      throw std::invalid_argument("BackboneConfig: strides must double per stage");
    }
  }
  if (input_size < max_stride() || input_size % max_stride() != 0) {
    throw std::invalid_argument("BackboneConfig: input_size must be a multiple of the deepest stride");
  }
}

void GcnSchedule::validate() const {
  for (const auto& level : kernels_per_level) {
    for (int k : level) {
      if (k < 1 || k % 2 == 0) throw std::invalid_argument("GcnSchedule: kernels must be odd");
    }
  }
}

void LrscnConfig::validate() const {
  backbone.validate();
  gcn.validate();
  if (decoder_channels < 1) throw std::invalid_argument("LrscnConfig: decoder_channels must be positive");
}

torch::Tensor upsample_to(const torch::Tensor& x, int64_t height, int64_t width) {
  if (x.size(2) == height && x.size(3) == width) return x;
  return F::interpolate(x, F::InterpolateFuncOptions()
                               .size(std::vector<int64_t>{height, width})
                               .mode(torch::kBilinear)
                               .align_corners(false));
}

ConvBnReluImpl::ConvBnReluImpl(int in, int out, int kernel, int stride) {
  conv = register_module(
      "conv", torch::nn::Conv2d(
                  torch::nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2).bias(false)));
  bn = register_module("bn", torch::nn::BatchNorm2d(out));
}

torch::Tensor ConvBnReluImpl::forward(const torch::Tensor& x) { return torch::relu(bn(conv(x))); }

BackboneImpl::BackboneImpl(const BackboneConfig& c) : cfg(c) {
  cfg.validate();
  stem = register_module("stem", torch::nn::Sequential());
  int in = 3;
  for (int s = cfg.stage_strides[0] / 2; s >= 1; s /= 2) {
    stem->push_back(ConvBnRelu(in, cfg.stem_channels, 3, s > 1 ? 2 : 1));
    in = cfg.stem_channels;
    if (s == 1) break;
  }
  for (int i = 0; i < 4; ++i) {
    const int out = cfg.stage_channels[i];
    stages[i] = register_module("stage" + std::to_string(i + 3),
                                torch::nn::Sequential(ConvBnRelu(in, out, 3, 2), ConvBnRelu(out, out, 3)));
    in = out;
  }
}

std::array<torch::Tensor, 4> BackboneImpl::forward(const torch::Tensor& image) {
  if (image.dim() != 4 || image.size(1) != 3) throw std::invalid_argument("Backbone: expected [N, 3, H, W]");
  if (image.size(2) % cfg.max_stride() != 0 || image.size(3) % cfg.max_stride() != 0) {
    throw std::invalid_argument("Backbone: input dims must be divisible by " + std::to_string(cfg.max_stride()));
  }
  std::array<torch::Tensor, 4> out;
  torch::Tensor x = stem->forward(image);
  for (int i = 0; i < 4; ++i) {
    x = stages[i]->forward(x);
    out[i] = x;
  }
  return out;
}

GcnImpl::GcnImpl(int channels, int k) {
  a1 = register_module("a1", conv(channels, channels, k, 1));
  a2 = register_module("a2", conv(channels, channels, 1, k));
  b1 = register_module("b1", conv(channels, channels, 1, k));
  b2 = register_module("b2", conv(channels, channels, k, 1));
}

torch::Tensor GcnImpl::forward(const torch::Tensor& x) { return torch::relu(a2(a1(x)) + b2(b1(x))); }

MecfImpl::MecfImpl(int low_channels, int high_channels, const std::vector<int>& kernels) {
  if (low_channels % 2 != 0 || high_channels % 2 != 0) {
    throw std::invalid_argument("Mecf: channel counts must be even");
  }
  half = low_channels / 2;
  me_down = register_module("me_down", ConvBnRelu(half, half, 3));
  me_gcn = register_module("me_gcn", torch::nn::ModuleList());
  for (int k : kernels) me_gcn->push_back(Gcn(half, k));
  const int squeezed = std::max(half / 2, 1);
  cf_compress = register_module("cf_compress", ConvBnRelu(half, squeezed, 1));
  cf_conv1 = register_module("cf_conv1", ConvBnRelu(squeezed, half, 3));
  cf_conv2 = register_module("cf_conv2", ConvBnRelu(half, half, 3));
  cf_align = register_module("cf_align", ConvBnRelu(high_channels / 2, half, 1));
}

torch::Tensor MecfImpl::forward(const torch::Tensor& f_l, const torch::Tensor& f_h) {
  if (f_l.size(1) != 2 * half) throw std::invalid_argument("Mecf: low-level channel mismatch");
  const int64_t h = f_l.size(2);
  const int64_t w = f_l.size(3);
  const auto parts = f_l.chunk(2, 1);

  torch::Tensor me = parts[0];
  const torch::Tensor pooled = F::avg_pool2d(me, F::AvgPool2dFuncOptions(2).ceil_mode(true));
  me = me + upsample_to(me_down(pooled), h, w);
  for (const auto& m : *me_gcn) me = m->as<Gcn>()->forward(me);

  torch::Tensor cf = cf_conv2(cf_conv1(cf_compress(parts[1])));
  const torch::Tensor high = f_h.chunk(2, 1)[1];
  cf = cf + upsample_to(cf_align(high), h, w);

  return torch::cat({me, cf}, 1);
}

DecoderImpl::DecoderImpl(const std::array<int, 4>& in_channels, int channels) {
  fuse[3] = register_module("fuse6", ConvBnRelu(in_channels[3], channels, 3));
  for (int i = 2; i >= 0; --i) {
    fuse[i] = register_module("fuse" + std::to_string(i + 3), ConvBnRelu(in_channels[i] + channels, channels, 3));
  }
  for (int i = 0; i < 3; ++i) {
    heads[i] = register_module("head" + std::to_string(i + 4), conv(channels, 1, 3, 3));
  }
}

std::array<torch::Tensor, 4> DecoderImpl::forward(const std::array<torch::Tensor, 4>& mecf) {
  for (int i = 0; i < 3; ++i) {
    if (mecf[i].size(2) <= mecf[i + 1].size(2) || mecf[i].size(3) <= mecf[i + 1].size(3)) {
      throw std::invalid_argument("Decoder: MECF outputs must have strictly decreasing resolution");
    }
  }
  std::array<torch::Tensor, 4> d;
  d[3] = fuse[3](mecf[3]);
  for (int i = 2; i >= 0; --i) {
    const torch::Tensor up = upsample_to(d[i + 1], mecf[i].size(2), mecf[i].size(3));
    d[i] = fuse[i](torch::cat({mecf[i], up}, 1));
  }
  return d;
}

SgaImpl::SgaImpl(int channels) {
  saliency_head = register_module("saliency_head", conv(channels, 1, 3, 3));
  trimap_head = register_module("trimap_head", conv(channels, 3, 3, 3));
}

SgaOutput SgaImpl::forward(const torch::Tensor& d3) {
  SgaOutput out;
  out.saliency = torch::sigmoid(saliency_head(d3));
  out.refined = d3 * out.saliency + d3;
  out.trimap_logits = trimap_head(out.refined);
  return out;
}

LrscnImpl::LrscnImpl(const LrscnConfig& c) : cfg(c) {
  cfg.validate();
  backbone = register_module("backbone", Backbone(cfg.backbone));
  const auto& ch = cfg.backbone.stage_channels;
  for (int i = 0; i < 4; ++i) {
    const int high = i < 3 ? ch[3] : ch[i];
    mecf[i] = register_module("mecf" + std::to_string(i + 3), Mecf(ch[i], high, cfg.gcn.kernels_per_level[i]));
  }
  decoder = register_module("decoder", Decoder(ch, cfg.decoder_channels));
  sga = register_module("sga", Sga(cfg.decoder_channels));
}

LrscnOutput LrscnImpl::forward(const torch::Tensor& image) {
  const auto f = backbone(image);
  std::array<torch::Tensor, 4> m;
  // Every level fuses with the deepest feature; level 6 fuses with itself.
  for (int i = 0; i < 4; ++i) m[i] = mecf[i](f[i], f[3]);
  const auto d = decoder(m);
  const SgaOutput s = sga(d[0]);
  LrscnOutput out;
  out.saliency_levels[0] = s.saliency;
  for (int i = 1; i < 4; ++i) out.saliency_levels[i] = torch::sigmoid(decoder->heads[i - 1](d[i]));
  out.trimap_logits = s.trimap_logits;
  out.refined_saliency = s.saliency;
  return out;
}

std::vector<torch::Tensor> LrscnImpl::backbone_parameters() { return backbone->parameters(); }

std::vector<torch::Tensor> LrscnImpl::head_parameters() {
  std::vector<torch::Tensor> out;
  for (const auto& item : named_parameters()) {
    if (item.key().rfind("backbone.", 0) != 0) out.push_back(item.value());
  }
  return out;
}

Trimap predict_trimap(const torch::Tensor& logits_in, int height, int width) {
  torch::Tensor logits = logits_in.detach().to(torch::kCPU, torch::kFloat64);
  if (logits.dim() == 4) {
    if (logits.size(0) != 1) throw std::invalid_argument("predict_trimap: expected a single image");
    logits = logits[0];
  }
  if (logits.dim() != 3 || logits.size(0) != 3) throw std::invalid_argument("predict_trimap: expected 3 logit channels");
  const int h = static_cast<int>(logits.size(1));
  const int w = static_cast<int>(logits.size(2));
  if (height < h || width < w) throw std::invalid_argument("predict_trimap: target smaller than logits");
  logits = logits.contiguous();
  const auto a = logits.accessor<double, 3>();
  Trimap small(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double l0 = a[0][y][x];
      const double l1 = a[1][y][x];
      const double l2 = a[2][y][x];
      std::uint8_t label = kUncertain;
      if (l1 < l0 || l1 < l2) label = l0 >= l2 ? kBackground : kSalient;
      small.at(y, x) = label;
    }
  }
  return resize_nearest(small, height, width);
}

Trimap predict_trimap(const LrscnOutput& output, int height, int width) {
  return predict_trimap(output.trimap_logits, height, width);
}

}  // namespace dsod
