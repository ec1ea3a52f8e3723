#include "dsod/spectral_norm.hpp"

#include <cmath>

namespace dsod {
namespace {

namespace F = torch::nn::functional;

torch::Tensor unit(const torch::Tensor& v) {
  return F::normalize(v, F::NormalizeFuncOptions().dim(0).eps(kSpectralFloor));
}

void iterate(const torch::Tensor& matrix, torch::Tensor& u, int iterations) {
  torch::NoGradGuard no_grad;
  for (int i = 0; i < iterations; ++i) {
    const torch::Tensor v = unit(torch::mv(matrix.t(), u));
    u.copy_(unit(torch::mv(matrix, v)));
  }
}

}  // namespace

torch::Tensor weight_matrix(const torch::Tensor& weight) { return weight.reshape({weight.size(0), -1}); }

SpectralState make_spectral_state(const torch::Tensor& weight, int power_iterations) {
  torch::NoGradGuard no_grad;
  return {unit(torch::randn({weight.size(0)}, weight.options().requires_grad(false))),
          power_iterations};
}

torch::Tensor spectral_sigma(const torch::Tensor& weight, const torch::Tensor& u) {
  const torch::Tensor matrix = weight_matrix(weight);
  torch::Tensor v;
  {
    torch::NoGradGuard no_grad;
    v = unit(torch::mv(matrix.t(), u));
  }
  return torch::dot(u, torch::mv(matrix, v)).clamp_min(kSpectralFloor);
}

torch::Tensor spectral_normalize(const torch::Tensor& weight, SpectralState& state) {
  iterate(weight_matrix(weight).detach(), state.u, state.power_iterations);
  return weight / spectral_sigma(weight, state.u);
}

SNConv2dImpl::SNConv2dImpl(int in_channels, int out_channels, int kernel, int stride_, bool with_bias)
    : stride(stride_), padding(kernel / 2) {
  // Same initialisation as torch::nn::Conv2d.
  torch::Tensor w = torch::empty({out_channels, in_channels, kernel, kernel});
  torch::nn::init::kaiming_uniform_(w, std::sqrt(5.0));
  weight = register_parameter("weight", w);
  if (with_bias) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel * kernel));
    bias = register_parameter("bias", torch::empty({out_channels}).uniform_(-bound, bound));
  }
  const auto svd = torch::linalg_svd(weight_matrix(w.detach()).to(torch::kFloat64), false);
  u = register_buffer("u", unit(std::get<0>(svd).select(1, 0).to(w.dtype()).contiguous()));
}

torch::Tensor SNConv2dImpl::forward(const torch::Tensor& x) {
  if (is_training() && !frozen && power_iterations > 0) {
    iterate(weight_matrix(weight).detach(), u, power_iterations);
  }
  return F::conv2d(x, normalized_weight(),
                   F::Conv2dFuncOptions().bias(bias).stride(stride).padding(padding));
}

torch::Tensor SNConv2dImpl::normalized_weight() const { return weight / spectral_sigma(weight, u); }

void SNConv2dImpl::power_iterate(int iterations) {
  iterate(weight_matrix(weight).detach(), u, iterations);
}

}  // namespace dsod
