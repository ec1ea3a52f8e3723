#include "dsod/tensor_io.hpp"

#include <stdexcept>

namespace dsod {
namespace {

torch::Tensor as_plane(const torch::Tensor& t) {
  torch::Tensor p = t.detach().to(torch::kCPU);
  while (p.dim() > 2) {
    if (p.size(0) != 1) throw std::invalid_argument("expected a single-channel tensor");
    p = p.squeeze(0);
  }
  if (p.dim() != 2) throw std::invalid_argument("expected a 2-D raster tensor");
  return p.contiguous();
}

template <typename P>
P float_plane(const torch::Tensor& t) {
  const torch::Tensor p = as_plane(t).to(torch::kFloat32);
  const auto* data = p.data_ptr<float>();
  std::vector<float> values(data, data + p.numel());
  return P(static_cast<int>(p.size(0)), static_cast<int>(p.size(1)), std::move(values));
}

}  // namespace

torch::Tensor to_tensor(const Image& image) {
  auto hwc = torch::from_blob(const_cast<float*>(image.values().data()),
                              {image.height(), image.width(), Image::kChannels}, torch::kFloat32);
  return hwc.permute({2, 0, 1}).contiguous();
}

torch::Tensor to_tensor(const BinaryMask& mask) {
  auto t = torch::from_blob(const_cast<std::uint8_t*>(mask.values().data()),
                            {1, mask.height(), mask.width()}, torch::kUInt8);
  return t.to(torch::kFloat32);
}

torch::Tensor to_tensor(const SaliencyMap& map) {
  return torch::from_blob(const_cast<float*>(map.values().data()), {1, map.height(), map.width()},
                          torch::kFloat32)
      .clone();
}

torch::Tensor to_tensor(const Trimap& trimap) {
  auto t = torch::from_blob(const_cast<std::uint8_t*>(trimap.values().data()),
                            {trimap.height(), trimap.width()}, torch::kUInt8);
  return t.to(torch::kInt64);
}

torch::Tensor one_hot(const Trimap& trimap) {
  return torch::one_hot(to_tensor(trimap), 3).permute({2, 0, 1}).to(torch::kFloat32).contiguous();
}

SaliencyMap saliency_from_tensor(const torch::Tensor& t) { return float_plane<SaliencyMap>(t); }

UncertaintyMap logvar_from_tensor(const torch::Tensor& t) { return float_plane<UncertaintyMap>(t); }

Trimap trimap_from_tensor(const torch::Tensor& labels) {
  const torch::Tensor p = as_plane(labels).to(torch::kUInt8).contiguous();
  const auto* data = p.data_ptr<std::uint8_t>();
  Trimap trimap(static_cast<int>(p.size(0)), static_cast<int>(p.size(1)),
                std::vector<std::uint8_t>(data, data + p.numel()));
  validate(trimap);
  return trimap;
}

Image image_from_tensor(const torch::Tensor& chw) {
  torch::Tensor t = chw.detach().to(torch::kCPU).to(torch::kFloat32);
  if (t.dim() == 4 && t.size(0) == 1) t = t.squeeze(0);
  if (t.dim() != 3 || t.size(0) != Image::kChannels) {
    throw std::invalid_argument("image_from_tensor: expected [3, H, W]");
  }
  const torch::Tensor hwc = t.permute({1, 2, 0}).contiguous();
  const auto* data = hwc.data_ptr<float>();
  return Image(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)),
               std::vector<float>(data, data + hwc.numel()));
}

torch::Tensor batch(const std::vector<torch::Tensor>& items) { return torch::stack(items, 0); }

}  // namespace dsod
