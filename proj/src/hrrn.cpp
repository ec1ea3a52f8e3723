#include "dsod/hrrn.hpp"

#include <stdexcept>
#include <string>

#include "dsod/lrscn.hpp"
#include "dsod/tensor_io.hpp"

namespace dsod {

void HrrnConfig::validate() const {
  if (depth < 1 || depth > 8) throw std::invalid_argument("HrrnConfig: depth must lie in [1, 8]");
  if (base_channels < 1 || input_shortcut_channels < 1 || final_channels < 1) {
    throw std::invalid_argument("HrrnConfig: channel counts must be positive");
  }
  if (power_iterations < 0) throw std::invalid_argument("HrrnConfig: power_iterations must be >= 0");
}

SnBlockImpl::SnBlockImpl(int in, int out, int stride) {
  first = register_module("first", SNConv2d(in, out, 3, stride));
  second = register_module("second", SNConv2d(out, out, 3));
}

torch::Tensor SnBlockImpl::forward(const torch::Tensor& x) {
  return torch::relu(second(torch::relu(first(x))));
}

HrrnImpl::HrrnImpl(const HrrnConfig& c) : cfg(c) {
  cfg.validate();
  encoder = register_module("encoder", torch::nn::ModuleList());
  shortcuts = register_module("shortcuts", torch::nn::ModuleList());
  upconvs = register_module("upconvs", torch::nn::ModuleList());
  std::vector<int> widths;
  int in = 6;
  for (int i = 0; i < cfg.depth; ++i) {
    const int out = cfg.base_channels << i;
    encoder->push_back(SnBlock(in, out, 2));
    shortcuts->push_back(SnBlock(out, out));
    widths.push_back(out);
    in = out;
  }
  bottleneck = register_module("bottleneck", SnBlock(in, in));
  // upconvs[i] maps stage i's width to stage i-1's (final_channels at i = 0).
  for (int i = 0; i < cfg.depth; ++i) {
    upconvs->push_back(SNConv2d(widths[i], i == 0 ? cfg.final_channels : widths[i - 1], 3));
  }
  input_shortcut = register_module("input_shortcut", SnBlock(6, cfg.input_shortcut_channels));
  fuse = register_module("fuse", SNConv2d(cfg.final_channels + cfg.input_shortcut_channels, cfg.final_channels, 3));
  saliency_head = register_module("saliency_head", SNConv2d(cfg.final_channels, 1, 3));
  logvar_head = register_module("logvar_head", SNConv2d(cfg.final_channels, 1, 3));
  for (auto& layer : sn_layers()) layer->power_iterations = cfg.power_iterations;
}

HrrnOutput HrrnImpl::forward(const torch::Tensor& input) {
  if (input.dim() != 4 || input.size(1) != 6) throw std::invalid_argument("Hrrn: expected [N, 6, H, W]");
  if (input.size(2) % cfg.divisor() != 0 || input.size(3) % cfg.divisor() != 0) {
    throw std::invalid_argument("Hrrn: input dims must be divisible by " + std::to_string(cfg.divisor()));
  }
  std::vector<torch::Tensor> skips;
  torch::Tensor x = input;
  for (const auto& m : *encoder) {
    x = m->as<SnBlock>()->forward(x);
    skips.push_back(x);
  }
  torch::Tensor h = bottleneck(x);
  for (int i = cfg.depth - 1; i >= 0; --i) {
    h = h + shortcuts[i]->as<SnBlock>()->forward(skips[static_cast<std::size_t>(i)]);
    h = torch::relu(upconvs[i]->as<SNConv2d>()->forward(h));
    h = upsample_to(h, h.size(2) * 2, h.size(3) * 2);
  }
  const torch::Tensor raw = input_shortcut(input);
  const torch::Tensor features = torch::relu(fuse(torch::cat({h, raw}, 1)));
  return {torch::sigmoid(saliency_head(features)), logvar_head(features)};
}

std::vector<SNConv2d> HrrnImpl::sn_layers() {
  std::vector<SNConv2d> out;
  for (const auto& m : modules(false)) {
    if (auto p = std::dynamic_pointer_cast<SNConv2dImpl>(m)) out.emplace_back(p);
  }
  return out;
}

void HrrnImpl::freeze_spectral_state(bool frozen) {
  for (auto& layer : sn_layers()) layer->frozen = frozen;
}

torch::Tensor hrrn_input(const Image& image, const Trimap& trimap) {
  if (image.height() != trimap.height() || image.width() != trimap.width()) {
    throw std::invalid_argument("hrrn_input: image and trimap dims differ");
  }
  return torch::cat({to_tensor(image), one_hot(trimap)}, 0).unsqueeze(0);
}

void overwrite_definite(SaliencyMap& saliency, const Trimap& trimap) {
  require_same_shape(saliency, trimap, "overwrite_definite");
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    if (trimap[i] == kBackground) saliency[i] = 0.0F;
    if (trimap[i] == kSalient) saliency[i] = 1.0F;
  }
}

Refinement refine(Hrrn& model, const Image& image, const Trimap& trimap) {
  const torch::Tensor input = hrrn_input(image, trimap);
  const bool was_training = model->is_training();
  model->eval();
  HrrnOutput out;
  {
    torch::NoGradGuard no_grad;
    out = model->forward(input);
  }
  if (was_training) model->train();
  Refinement r{saliency_from_tensor(out.saliency), logvar_from_tensor(out.logvar)};
  if (model->cfg.overwrite_definite) overwrite_definite(r.saliency, trimap);
  return r;
}

}  // namespace dsod
