#include "dsod/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsod {
namespace {

namespace F = torch::nn::functional;

torch::Tensor as_nchw(const torch::Tensor& t) {
  switch (t.dim()) {
    case 2: return t.unsqueeze(0).unsqueeze(0);
    case 3: return t.unsqueeze(1);
    case 4: return t;
    default: throw std::invalid_argument("expected a 2-D to 4-D raster tensor");
  }
}

// Trimap labels as [N, 1, H, W] int64.
torch::Tensor labels_nchw(const torch::Tensor& t) {
  torch::Tensor l = t.dim() == 2 ? t.unsqueeze(0) : t;
  if (l.dim() == 3) l = l.unsqueeze(1);
  if (l.dim() != 4 || l.size(1) != 1) throw std::invalid_argument("trimap tensor must be [N, H, W]");
  return l;
}

void require_same(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

torch::Tensor zero_like_graph(const torch::Tensor& anchor) { return (anchor * 0).sum(); }

torch::Tensor masked_mean(const torch::Tensor& values, const torch::Tensor& mask,
                          std::int64_t& count) {
  count = mask.sum().item<std::int64_t>();
  if (count == 0) return zero_like_graph(values);
  return (values * mask.to(values.scalar_type())).sum() / static_cast<double>(count);
}

}  // namespace

void SsimConfig::validate() const {
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("SsimConfig: window must be odd and >= 3");
  if (stride < 1) throw std::invalid_argument("SsimConfig: stride must be >= 1");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("SsimConfig: c1 and c2 must be positive");
}

LossValue bce_pixel_loss(const torch::Tensor& s_in, const torch::Tensor& g_in) {
  const torch::Tensor s = as_nchw(s_in);
  const torch::Tensor g = as_nchw(g_in);
  require_same(s, g, "bce_pixel_loss");
  const torch::Tensor p = s.clamp(kBceClamp, 1.0 - kBceClamp);
  const torch::Tensor loss = -(g * torch::log(p) + (1 - g) * torch::log(1 - p));
  return {loss.mean(), s.numel()};
}

LossValue ssim_region_loss(const torch::Tensor& s_in, const torch::Tensor& g_in,
                           const SsimConfig& cfg) {
  cfg.validate();
  const torch::Tensor s = as_nchw(s_in);
  const torch::Tensor g = as_nchw(g_in);
  require_same(s, g, "ssim_region_loss");
  if (s.size(2) < cfg.window || s.size(3) < cfg.window) {
    throw std::invalid_argument("ssim_region_loss: raster smaller than the SSIM window");
  }
  const auto pool = [&](const torch::Tensor& t) {
    return F::avg_pool2d(t, F::AvgPool2dFuncOptions(cfg.window).stride(cfg.stride));
  };
  const torch::Tensor mu_s = pool(s);
  const torch::Tensor mu_g = pool(g);
  const torch::Tensor var_s = pool(s * s) - mu_s * mu_s;
  const torch::Tensor var_g = pool(g * g) - mu_g * mu_g;
  const torch::Tensor cov = pool(s * g) - mu_s * mu_g;
  const torch::Tensor ssim = ((2 * mu_s * mu_g + cfg.c1) * (2 * cov + cfg.c2)) /
                             ((mu_s * mu_s + mu_g * mu_g + cfg.c1) * (var_s + var_g + cfg.c2));
  return {1 - ssim.mean(), ssim.numel()};
}

LossValue fmeasure_loss(const torch::Tensor& s_in, const torch::Tensor& g_in) {
  const torch::Tensor s = as_nchw(s_in);
  const torch::Tensor g = as_nchw(g_in);
  require_same(s, g, "fmeasure_loss");
  const std::vector<int64_t> dims{1, 2, 3};
  const torch::Tensor tp = (s * g).sum(dims);
  const torch::Tensor precision = tp / (s.sum(dims) + kFmeasureEpsilon);
  const torch::Tensor recall = tp / (g.sum(dims) + kFmeasureEpsilon);
  // The epsilon in the denominator keeps F defined when s and g are both
  // empty (precision = recall = 0).
  const torch::Tensor f = (1 + kFmeasureBetaSquared) * precision * recall /
                          (kFmeasureBetaSquared * precision + recall + kFmeasureEpsilon);
  return {1 - f.mean(), s.numel()};
}

LossValue saliency_level_loss(const torch::Tensor& s, const torch::Tensor& g,
                              const SsimConfig& cfg) {
  const LossValue object = fmeasure_loss(s, g);
  const LossValue region = ssim_region_loss(s, g, cfg);
  const LossValue pixel = bce_pixel_loss(s, g);
  return {object.value + region.value + pixel.value, pixel.pixel_count};
}

LossValue saliency_loss(std::span<const torch::Tensor> levels, const torch::Tensor& g_in,
                        const SsimConfig& cfg) {
  if (levels.empty()) throw std::invalid_argument("saliency_loss: no levels");
  if (levels.size() > 4) throw std::invalid_argument("saliency_loss: at most 4 levels");
  const torch::Tensor g = as_nchw(g_in);
  torch::Tensor total;
  std::int64_t count = 0;
  double weight = 1.0;
  for (const auto& level : levels) {
    const torch::Tensor s = as_nchw(level);
    torch::Tensor target = g;
    if (s.size(2) != g.size(2) || s.size(3) != g.size(3)) {
      target = F::interpolate(g, F::InterpolateFuncOptions()
                                     .size(std::vector<int64_t>{s.size(2), s.size(3)})
                                     .mode(torch::kNearest));
    }
    const LossValue l = saliency_level_loss(s, target, cfg);
    total = total.defined() ? total + weight * l.value : weight * l.value;
    count += l.pixel_count;
    weight *= 0.5;
  }
  return {total, count};
}

LossValue trimap_ce_loss(const torch::Tensor& logits, const torch::Tensor& trimap) {
  const torch::Tensor x = logits.dim() == 3 ? logits.unsqueeze(0) : logits;
  const torch::Tensor t = labels_nchw(trimap).squeeze(1);
  if (x.dim() != 4 || x.size(1) != 3 || x.size(0) != t.size(0) || x.size(2) != t.size(1) ||
      x.size(3) != t.size(2)) {
    throw std::invalid_argument("trimap_ce_loss: shape mismatch");
  }
  return {F::cross_entropy(x, t), t.numel()};
}

LossValue l1_definite_loss(const torch::Tensor& s_in, const torch::Tensor& g_in,
                           const torch::Tensor& trimap) {
  const torch::Tensor s = as_nchw(s_in);
  const torch::Tensor g = as_nchw(g_in);
  const torch::Tensor t = labels_nchw(trimap);
  require_same(s, g, "l1_definite_loss");
  if (t.sizes() != s.sizes()) throw std::invalid_argument("l1_definite_loss: trimap shape mismatch");
  std::int64_t count = 0;
  torch::Tensor value = masked_mean(torch::abs(s - g), t != 1, count);
  return {value, count};
}

LossValue uncertainty_loss(const torch::Tensor& s_in, const torch::Tensor& g_in,
                           const torch::Tensor& logvar_in, const torch::Tensor& trimap) {
  const torch::Tensor s = as_nchw(s_in);
  const torch::Tensor g = as_nchw(g_in);
  const torch::Tensor logvar = as_nchw(logvar_in);
  const torch::Tensor t = labels_nchw(trimap);
  require_same(s, g, "uncertainty_loss");
  require_same(s, logvar, "uncertainty_loss");
  if (t.sizes() != s.sizes()) throw std::invalid_argument("uncertainty_loss: trimap shape mismatch");
  if (!torch::isfinite(logvar).all().item<bool>()) {
    throw std::invalid_argument("uncertainty_loss: non-finite log-variance");
  }
  const torch::Tensor residual = (s - g).pow(2);
  const torch::Tensor clamped = logvar.clamp(-kLogvarBound, kLogvarBound);
  const torch::Tensor term = 0.5 * residual * torch::exp(-clamped) + 0.5 * clamped;
  std::int64_t count = 0;
  torch::Tensor value = masked_mean(term, t == 1, count);
  return {value, count};
}

LossValue hrrn_loss(const torch::Tensor& s, const torch::Tensor& g, const torch::Tensor& logvar,
                    const torch::Tensor& trimap, bool use_uncertainty) {
  const LossValue l1 = l1_definite_loss(s, g, trimap);
  if (!use_uncertainty) return l1;
  const LossValue unc = uncertainty_loss(s, g, logvar, trimap);
  return {unc.value + l1.value, unc.pixel_count + l1.pixel_count};
}

LossValue lrscn_loss(std::span<const torch::Tensor> levels, const torch::Tensor& g,
                     const torch::Tensor& logits, const torch::Tensor& trimap,
                     const SsimConfig& cfg) {
  const LossValue sal = saliency_loss(levels, g, cfg);
  const LossValue tri = trimap_ce_loss(logits, trimap);
  return {sal.value + tri.value, sal.pixel_count + tri.pixel_count};
}

double uncertainty_term(double squared_residual, double logvar) {
  const double s = std::clamp(logvar, -kLogvarBound, kLogvarBound);
  return 0.5 * squared_residual * std::exp(-s) + 0.5 * s;
}

double uncertainty_term_dlogvar(double squared_residual, double logvar) {
  if (logvar < -kLogvarBound || logvar > kLogvarBound) return 0.0;
  return 0.5 - 0.5 * squared_residual * std::exp(-logvar);
}

}  // namespace dsod
