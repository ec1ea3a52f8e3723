#include "dsod/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dsod {
namespace {

double evaluate(const std::function<torch::Tensor()>& loss_fn) {
  torch::NoGradGuard no_grad;
  const double v = loss_fn().item<double>();
  if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite loss");
  return v;
}

std::vector<std::int64_t> pick_elements(std::int64_t n, double fraction, std::mt19937_64& rng) {
  std::vector<std::int64_t> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  if (fraction >= 1.0) return all;
  const auto k = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(fraction * n)));
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

GradCheckResult grad_check(const std::function<torch::Tensor()>& loss_fn,
                           const std::vector<torch::Tensor>& inputs,
                           const GradCheckOptions& options) {
  if (!(options.epsilon >= 1e-6 && options.epsilon <= 1e-3)) {
    throw std::invalid_argument("grad_check: epsilon must lie in [1e-6, 1e-3]");
  }
  if (!(options.sample_fraction > 0.0)) {
    throw std::invalid_argument("grad_check: sample_fraction must be positive");
  }
  for (const auto& x : inputs) {
    if (!x.requires_grad() || !x.is_leaf()) {
      throw std::invalid_argument("grad_check: inputs must be leaf tensors requiring grad");
    }
    if (x.mutable_grad().defined()) x.mutable_grad().zero_();
  }

  const torch::Tensor loss = loss_fn();
  if (!std::isfinite(loss.item<double>())) throw std::runtime_error("grad_check: non-finite loss");
  const auto grads = torch::autograd::grad({loss}, inputs, {}, false, false, true);

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const torch::Tensor analytic =
        grads[t].defined() ? grads[t].detach().reshape({-1}) : torch::zeros({inputs[t].numel()}, inputs[t].options());
    torch::Tensor flat = inputs[t].detach().view({-1});
    for (const std::int64_t i : pick_elements(flat.numel(), options.sample_fraction, rng)) {
      torch::Tensor cell = flat[i];
      const double original = cell.item<double>();
      {
        torch::NoGradGuard no_grad;
        cell.fill_(original + options.epsilon);
      }
      const double plus = evaluate(loss_fn);
      {
        torch::NoGradGuard no_grad;
        cell.fill_(original - options.epsilon);
      }
      const double minus = evaluate(loss_fn);
      {
        torch::NoGradGuard no_grad;
        cell.fill_(original);
      }
      const double numeric = (plus - minus) / (2.0 * options.epsilon);
      const double a = analytic[i].item<double>();
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
      ++result.elements_checked;
    }
  }
  return result;
}

}  // namespace dsod
