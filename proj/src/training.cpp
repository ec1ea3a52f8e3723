#include "dsod/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dsod/losses.hpp"
#include "dsod/morphology.hpp"
#include "dsod/synthetic.hpp"
#include "dsod/tensor_io.hpp"
#include "dsod/trimap.hpp"

namespace dsod {
namespace {

// Streams for mix_seed so that sampling, trimaps and augmentation draw from
// independent generators.
constexpr std::uint64_t kOrderStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
constexpr std::uint64_t kTrimapStream = 3;
constexpr std::uint64_t kNoiseStream = 4;

/// Shuffled pass over the dataset, reshuffled every epoch.
class EpochSampler {
 public:
  EpochSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  struct Draw {
    std::size_t index;
    std::uint64_t epoch;
  };

  Draw next() {
    if (pos_ == order_.size()) {
      pos_ = 0;
      ++epoch_;
      std::shuffle(order_.begin(), order_.end(), rng_);
    }
    return {order_[pos_++], epoch_};
  }

 private:
  std::vector<std::size_t> order_;
  std::mt19937_64 rng_;
  std::size_t pos_ = 0;
  std::uint64_t epoch_ = 0;
};

const BinaryMask& target_mask(const DatasetRecord& r) { return r.noisy_mask ? *r.noisy_mask : r.mask; }

void set_lr(torch::optim::SGD& opt, std::size_t group, double lr) {
  static_cast<torch::optim::SGDOptions&>(opt.param_groups()[group].options()).lr(lr);
}

// Global gradient norm before clipping. A spike in the uncertainty term
// (tiny residual, very negative logvar) can otherwise throw the logvar head
// far positive in one step and stall training.
double clip_gradients(const std::vector<torch::Tensor>& params, double max_norm) {
  const double limit = max_norm > 0.0 ? max_norm : std::numeric_limits<double>::infinity();
  return torch::nn::utils::clip_grad_norm_(params, limit);
}

NamedTensors optimizer_state(torch::optim::SGD& opt) {
  NamedTensors out;
  auto& state = opt.state();
  const auto& groups = opt.param_groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = 0; i < groups[g].params().size(); ++i) {
      const auto it = state.find(groups[g].params()[i].unsafeGetTensorImpl());
      if (it == state.end()) continue;
      const auto& s = static_cast<const torch::optim::SGDParamState&>(*it->second);
      if (s.momentum_buffer().defined()) {
        out.emplace_back("group" + std::to_string(g) + ".param" + std::to_string(i), s.momentum_buffer().clone());
      }
    }
  }
  return out;
}

void check_finite(double loss, const char* stage, int step, const nlohmann::json& components) {
  if (std::isfinite(loss)) return;
  std::ostringstream msg;
  msg << stage << " training diverged at step " << step << ": loss " << loss << ", components "
      << components.dump();
  throw TrainingDiverged(msg.str());
}

void log_record(const TrainOptions& options, const OptimConfig& optim, int step, nlohmann::json record) {
  if (!options.log) return;
  if (step % optim.log_every != 0 && step != optim.steps - 1) return;
  *options.log << record.dump() << '\n';
  options.log->flush();
}

void require_data(const Dataset& data, const char* stage) {
  if (data.empty()) throw std::invalid_argument(std::string(stage) + ": dataset is empty");
}

}  // namespace

double learning_rate(const OptimConfig& cfg, int step) {
  if (step < 0) throw std::invalid_argument("learning_rate: negative step");
  const int warmup = std::min(cfg.warmup_steps, cfg.steps);
  if (step < warmup) return cfg.lr * static_cast<double>(step + 1) / warmup;
  const int decay_steps = cfg.steps - warmup;
  if (decay_steps <= 0) return cfg.lr;
  const double p = std::min(1.0, static_cast<double>(step - warmup) / decay_steps);
  if (cfg.schedule == Schedule::kLinear) return cfg.lr * (1.0 - p);
  return cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * p));
}

void corrupt_dataset(Dataset& data, int kernel, std::uint64_t seed) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].noisy_mask = corrupt_mask(data[i].mask, kernel, CorruptionMode::kRandom,
                                      mix_seed(mix_seed(seed, kNoiseStream), i));
  }
}

TrainingResult train_lrscn(const TrainConfig& cfg, const Dataset& data, const TrainOptions& options) {
  cfg.validate();
  require_data(data, "train_lrscn");
  const auto& stage = cfg.lrscn;
  const auto& optim = stage.optim;
  torch::manual_seed(cfg.seed);
  Lrscn model(stage.model);
  model->train();

  std::vector<torch::optim::OptimizerParamGroup> groups;
  groups.emplace_back(model->backbone_parameters());
  groups.emplace_back(model->head_parameters());
  torch::optim::SGD opt(groups, torch::optim::SGDOptions(optim.lr).momentum(optim.momentum).weight_decay(optim.weight_decay));

  EpochSampler sampler(data.size(), mix_seed(cfg.seed, kOrderStream));
  std::mt19937_64 aug(mix_seed(cfg.seed, kAugmentStream));
  const int base = stage.model.backbone.input_size;
  const int reduction = stage.model.backbone.stage_strides[0];

  TrainingResult result;
  for (int step = 0; step < optim.steps; ++step) {
    int size = base;
    if (stage.multiscale && !stage.scales.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, stage.scales.size() - 1);
      size = static_cast<int>(std::lround(stage.scales[pick(aug)] * base));
    }
    std::vector<torch::Tensor> xs, gs, ts;
    for (int b = 0; b < optim.batch_size; ++b) {
      const auto draw = sampler.next();
      const DatasetRecord& rec = data[draw.index];
      Image image = resize_bilinear(rec.image, size, size);
      BinaryMask mask = resize_nearest(target_mask(rec), size, size);
      if (optim.flip && std::bernoulli_distribution(0.5)(aug)) {
        image = flip_horizontal(image);
        mask = flip_horizontal(mask);
      }
      const std::uint64_t tseed = mix_seed(mix_seed(cfg.seed, kTrimapStream), draw.epoch * data.size() + draw.index);
      const Trimap trimap = random_trimap_from_mask(mask, tseed);
      xs.push_back(to_tensor(image));
      gs.push_back(to_tensor(mask));
      ts.push_back(to_tensor(resize_nearest(trimap, size / reduction, size / reduction)));
    }
    const torch::Tensor x = batch(xs);
    const torch::Tensor g = batch(gs);
    const torch::Tensor t = batch(ts);

    const double head_lr = learning_rate(optim, step);
    set_lr(opt, 0, head_lr * optim.backbone_lr_ratio);
    set_lr(opt, 1, head_lr);

    const LrscnOutput out = model->forward(x);
    std::array<torch::Tensor, 4> levels;
    for (int i = 0; i < 4; ++i) levels[i] = upsample_to(out.saliency_levels[i], size, size);
    const LossValue sal = saliency_loss(levels, g);
    const LossValue tri = trimap_ce_loss(out.trimap_logits, t);
    const torch::Tensor loss = sal.value + tri.value;
    const double value = loss.item<double>();
    const nlohmann::json components{{"saliency", sal.value.item<double>()}, {"trimap", tri.value.item<double>()}};
    check_finite(value, "lrscn", step, components);
    result.losses.push_back(value);

    double grad_norm = 0.0;
    if (sal.pixel_count + tri.pixel_count == 0) {
      ++result.degenerate_steps;
    } else {
      opt.zero_grad();
      loss.backward();
      grad_norm = clip_gradients(model->parameters(), optim.grad_clip);
      opt.step();
    }
    nlohmann::json record{{"stage", "lrscn"}, {"step", step},       {"loss", value},
                          {"lr", head_lr},     {"size", size},       {"grad_norm", grad_norm}};
    record.update(components);
    log_record(options, optim, step, record);
  }

  model->eval();
  TrainingResult& r = result;
  r.checkpoint.kind = ModelKind::kLrscn;
  r.checkpoint.config = {{"model", to_json(stage.model)}, {"train", to_json(cfg)}};
  r.checkpoint.step = optim.steps;
  r.checkpoint.metrics = {{"initial_loss", r.losses.front()}, {"final_loss", r.losses.back()},
                          {"degenerate_steps", r.degenerate_steps}};
  r.checkpoint.weights = module_state(*model);
  r.checkpoint.optimizer = optimizer_state(opt);
  return result;
}

TrainingResult train_hrrn(const TrainConfig& cfg, const Dataset& data_in, const TrainOptions& options) {
  cfg.validate();
  require_data(data_in, "train_hrrn");
  const auto& stage = cfg.hrrn;
  const auto& optim = stage.optim;

  const Dataset* data = &data_in;
  Dataset noisy;
  if (stage.noise_kernel != 0) {
    noisy = data_in;
    corrupt_dataset(noisy, stage.noise_kernel, cfg.seed);
    data = &noisy;
  }
  const TrimapSource source = options.trimap_source ? options.trimap_source : TrimapSource(random_trimap_from_mask);

  torch::manual_seed(cfg.seed);
  Hrrn model(stage.model);
  model->train();
  torch::optim::SGD opt(model->parameters(),
                        torch::optim::SGDOptions(optim.lr).momentum(optim.momentum).weight_decay(optim.weight_decay));

  EpochSampler sampler(data->size(), mix_seed(cfg.seed, kOrderStream));
  std::mt19937_64 aug(mix_seed(cfg.seed, kAugmentStream));
  const int canonical = stage.canonical_size;
  const int tile = stage.tile_size;
  std::uniform_int_distribution<int> offset(0, canonical - tile);

  TrainingResult result;
  for (int step = 0; step < optim.steps; ++step) {
    std::vector<torch::Tensor> xs, gs, ts;
    for (int b = 0; b < optim.batch_size; ++b) {
      const auto draw = sampler.next();
      const DatasetRecord& rec = (*data)[draw.index];
      const BinaryMask& mask = target_mask(rec);
      const std::uint64_t tseed = mix_seed(mix_seed(cfg.seed, kTrimapStream), draw.epoch * data->size() + draw.index);
      const Trimap trimap = source(mask, tseed);
      const int y0 = offset(aug);
      const int x0 = offset(aug);
      Image image = crop(resize_bilinear(rec.image, canonical, canonical), y0, x0, tile, tile);
      BinaryMask g = crop(resize_nearest(mask, canonical, canonical), y0, x0, tile, tile);
      Trimap t = crop(resize_nearest(trimap, canonical, canonical), y0, x0, tile, tile);
      if (optim.flip && std::bernoulli_distribution(0.5)(aug)) {
        image = flip_horizontal(image);
        g = flip_horizontal(g);
        t = flip_horizontal(t);
      }
      xs.push_back(torch::cat({to_tensor(image), one_hot(t)}, 0));
      gs.push_back(to_tensor(g));
      ts.push_back(to_tensor(t));
    }
    const torch::Tensor x = batch(xs);
    const torch::Tensor g = batch(gs);
    const torch::Tensor t = batch(ts);

    const double lr = learning_rate(optim, step);
    set_lr(opt, 0, lr);

    const HrrnOutput out = model->forward(x);
    if (!torch::isfinite(out.logvar).all().item<bool>()) {
      check_finite(std::numeric_limits<double>::quiet_NaN(), "hrrn", step, {{"logvar", "non-finite"}});
    }
    const LossValue l1 = l1_definite_loss(out.saliency, g, t);
    torch::Tensor loss = l1.value;
    std::int64_t count = l1.pixel_count;
    nlohmann::json components{{"l1", l1.value.item<double>()}};
    if (stage.use_uncertainty) {
      const LossValue unc = uncertainty_loss(out.saliency, g, out.logvar, t);
      loss = unc.value + loss;
      count += unc.pixel_count;
      components["uncertainty"] = unc.value.item<double>();
    }
    const double value = loss.item<double>();
    check_finite(value, "hrrn", step, components);
    result.losses.push_back(value);

    double grad_norm = 0.0;
    if (count == 0) {
      ++result.degenerate_steps;
    } else {
      opt.zero_grad();
      loss.backward();
      grad_norm = clip_gradients(model->parameters(), optim.grad_clip);
      opt.step();
    }
    nlohmann::json record{{"stage", "hrrn"}, {"step", step}, {"loss", value}, {"lr", lr},
                          {"supervised_pixels", count}, {"grad_norm", grad_norm}};
    record.update(components);
    log_record(options, optim, step, record);
  }

  model->eval();
  TrainingResult& r = result;
  r.checkpoint.kind = ModelKind::kHrrn;
  r.checkpoint.config = {{"model", to_json(stage.model)}, {"train", to_json(cfg)}};
  r.checkpoint.step = optim.steps;
  r.checkpoint.metrics = {{"initial_loss", r.losses.front()}, {"final_loss", r.losses.back()},
                          {"degenerate_steps", r.degenerate_steps}};
  r.checkpoint.weights = module_state(*model);
  r.checkpoint.optimizer = optimizer_state(opt);
  return result;
}

Lrscn load_lrscn(const Checkpoint& ckpt) {
  if (ckpt.kind != ModelKind::kLrscn) throw CheckpointError("checkpoint holds a " + to_string(ckpt.kind) + " model, expected lrscn");
  LrscnConfig mc;
  try {
    mc = lrscn_config_from_json(ckpt.config.at("model"));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: bad lrscn config: ") + e.what());
  }
  Lrscn model(mc);
  load_module_state(*model, ckpt.weights);
  model->eval();
  return model;
}

Hrrn load_hrrn(const Checkpoint& ckpt) {
  if (ckpt.kind != ModelKind::kHrrn) throw CheckpointError("checkpoint holds a " + to_string(ckpt.kind) + " model, expected hrrn");
  HrrnConfig mc;
  try {
    mc = hrrn_config_from_json(ckpt.config.at("model"));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: bad hrrn config: ") + e.what());
  }
  Hrrn model(mc);
  load_module_state(*model, ckpt.weights);
  model->eval();
  return model;
}

}  // namespace dsod
