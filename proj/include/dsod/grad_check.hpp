#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <torch/torch.h>

namespace dsod {

struct GradCheckOptions {
  double epsilon = 1e-6;        // must lie in [1e-6, 1e-3]
  double sample_fraction = 1.0; // fraction of elements checked per tensor
  std::uint64_t seed = 0;       // element sampling
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::int64_t elements_checked = 0;
};

/// Compares autograd gradients of `loss_fn` with central differences.
///
/// `inputs` are leaf tensors (double precision, requires_grad) that
/// `loss_fn` reads; they are perturbed in place one element at a time and
/// restored afterwards. The error per element is
/// |a - n| / max(|a|, |n|, 1e-8). Throws std::runtime_error if the loss is
/// not finite and std::invalid_argument for an out-of-range epsilon.
GradCheckResult grad_check(const std::function<torch::Tensor()>& loss_fn,
                           const std::vector<torch::Tensor>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace dsod
