#pragma once

#include <cstdint>
#include <span>

#include <torch/torch.h>

namespace dsod {

/// Scalar loss tensor (differentiable) plus the number of contributing
/// pixels (windows, for the SSIM term).
struct LossValue {
  torch::Tensor value;
  std::int64_t pixel_count = 0;

  double item() const { return value.item<double>(); }
};

inline constexpr double kBceClamp = 1e-7;
inline constexpr double kFmeasureEpsilon = 1e-7;
inline constexpr double kFmeasureBetaSquared = 0.3;

struct SsimConfig {
  int window = 11;
  int stride = 11;
  double c1 = 1e-4;
  double c2 = 9e-4;

  void validate() const;
};

// Tensor conventions: saliency, targets and log-variances are [N, 1, H, W]
// (a missing batch or channel dim is added); trimaps are int64 labels
// [N, H, W] or [N, 1, H, W]; logits are [N, 3, H, W]. Reductions run over
// the whole batch.

/// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
LossValue bce_pixel_loss(const torch::Tensor& s, const torch::Tensor& g);

/// 1 - mean SSIM over windows tiled with cfg.stride; partial windows at the
/// right/bottom edges are dropped. Statistics are population moments.
LossValue ssim_region_loss(const torch::Tensor& s, const torch::Tensor& g,
                           const SsimConfig& cfg = {});

/// 1 - F_beta with soft precision/recall, computed per image and averaged.
LossValue fmeasure_loss(const torch::Tensor& s, const torch::Tensor& g);

/// Object + region + pixel terms for one resolution level.
LossValue saliency_level_loss(const torch::Tensor& s, const torch::Tensor& g,
                              const SsimConfig& cfg = {});

/// sum_i 2^-(i-1) * level loss, finest level first. `g` is resized
/// (nearest) to each level's resolution when the sizes differ.
LossValue saliency_loss(std::span<const torch::Tensor> levels, const torch::Tensor& g,
                        const SsimConfig& cfg = {});

/// Softmax cross-entropy of 3-class logits against trimap labels.
LossValue trimap_ce_loss(const torch::Tensor& logits, const torch::Tensor& trimap);

/// Mean |s - g| over definite pixels (labels 0 and 2). An empty definite set
/// gives 0 with pixel_count 0.
LossValue l1_definite_loss(const torch::Tensor& s, const torch::Tensor& g,
                           const torch::Tensor& trimap);

/// Log-variances are clamped to [-kLogvarBound, kLogvarBound] inside the
/// uncertainty term. On cleanly fitted pixels the residual goes to zero and
/// the unbounded optimum ln(residual) drags the head towards -inf until
/// exp(-logvar) overflows.
inline constexpr double kLogvarBound = 8.0;

/// Mean over uncertain pixels of 0.5 * (s - g)^2 * exp(-logvar) + 0.5 * logvar.
/// Throws std::invalid_argument on non-finite log-variances.
LossValue uncertainty_loss(const torch::Tensor& s, const torch::Tensor& g,
                           const torch::Tensor& logvar, const torch::Tensor& trimap);

/// Uncertainty + definite-region L1. With `use_uncertainty` false only the
/// L1 term remains (ablation arm).
LossValue hrrn_loss(const torch::Tensor& s, const torch::Tensor& g, const torch::Tensor& logvar,
                    const torch::Tensor& trimap, bool use_uncertainty = true);

/// saliency_loss + trimap_ce_loss.
LossValue lrscn_loss(std::span<const torch::Tensor> levels, const torch::Tensor& g,
                     const torch::Tensor& logits, const torch::Tensor& trimap,
                     const SsimConfig& cfg = {});

/// Per-pixel uncertainty term and its partial derivative in the
/// log-variance; the minimiser over logvar is ln(residual) whenever that
/// lies inside the clamp.
double uncertainty_term(double squared_residual, double logvar);
double uncertainty_term_dlogvar(double squared_residual, double logvar);

}  // namespace dsod
