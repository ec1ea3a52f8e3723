#pragma once

#include <torch/torch.h>

namespace dsod {

inline constexpr double kSpectralFloor = 1e-12;

/// Running estimate of a weight matrix's leading left singular vector.
struct SpectralState {
  torch::Tensor u;  // unit vector, length = out_channels
  int power_iterations = 1;
};

/// (out_channels x everything-else) view of a kernel.
torch::Tensor weight_matrix(const torch::Tensor& weight);

/// Random unit start vector for `weight`.
SpectralState make_spectral_state(const torch::Tensor& weight, int power_iterations = 1);

/// Runs state.power_iterations updates u <- normalize(W normalize(W^T u)) in
/// place, then returns weight / sigma with sigma = u^T W v,
/// v = normalize(W^T u). Gradients flow through W in both the numerator and
/// sigma; u and v are constants. sigma is floored at 1e-12.
torch::Tensor spectral_normalize(const torch::Tensor& weight, SpectralState& state);

/// sigma estimate from the current state without updating it.
torch::Tensor spectral_sigma(const torch::Tensor& weight, const torch::Tensor& u);

/// Conv2d whose kernel is divided by its estimated spectral norm on every
/// forward. u starts at the kernel's leading left singular vector; from a
/// random start, layers whose top two singular values are close need
/// thousands of power iterations to settle. The estimate is refined (one step by default) only in training
/// mode and while not frozen, so inference never mutates module state.
struct SNConv2dImpl : torch::nn::Module {
  SNConv2dImpl(int in_channels, int out_channels, int kernel, int stride = 1, bool bias = true);

  torch::Tensor forward(const torch::Tensor& x);

  /// Divided kernel for the current state (no state update).
  torch::Tensor normalized_weight() const;
  /// Advances the singular-vector estimate without running a convolution.
  void power_iterate(int iterations);

  torch::Tensor weight;
  torch::Tensor bias;
  torch::Tensor u;
  int stride = 1;
  int padding = 0;
  int power_iterations = 1;
  bool frozen = false;
};
TORCH_MODULE(SNConv2d);

}  // namespace dsod
