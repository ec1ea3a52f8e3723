#include "dsod/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dsod/morphology.hpp"

namespace dsod {
namespace {

using nlohmann::json;

std::string schedule_name(Schedule s) { return s == Schedule::kLinear ? "linear" : "cosine"; }

Schedule schedule_from(const std::string& name) {
  if (name == "linear") return Schedule::kLinear;
  if (name == "cosine") return Schedule::kCosine;
  throw ConfigError("schedule must be 'linear' or 'cosine', got '" + name + "'");
}

json optim_json(const OptimConfig& o) {
  return {{"steps", o.steps},
          {"batch_size", o.batch_size},
          {"lr", o.lr},
          {"backbone_lr_ratio", o.backbone_lr_ratio},
          {"momentum", o.momentum},
          {"weight_decay", o.weight_decay},
          {"warmup_steps", o.warmup_steps},
          {"schedule", schedule_name(o.schedule)},
          {"flip", o.flip},
          {"log_every", o.log_every},
          {"grad_clip", o.grad_clip}};
}

OptimConfig optim_from(const json& j) {
  OptimConfig o;
  j.at("steps").get_to(o.steps);
  j.at("batch_size").get_to(o.batch_size);
  j.at("lr").get_to(o.lr);
  j.at("backbone_lr_ratio").get_to(o.backbone_lr_ratio);
  j.at("momentum").get_to(o.momentum);
  j.at("weight_decay").get_to(o.weight_decay);
  j.at("warmup_steps").get_to(o.warmup_steps);
  o.schedule = schedule_from(j.at("schedule").get<std::string>());
  j.at("flip").get_to(o.flip);
  j.at("log_every").get_to(o.log_every);
  j.at("grad_clip").get_to(o.grad_clip);
  return o;
}

TrainConfig defaults() {
  TrainConfig cfg;
  cfg.lrscn.optim.lr = 0.01;
  cfg.lrscn.optim.schedule = Schedule::kLinear;
  cfg.hrrn.optim.lr = 0.002;
  cfg.hrrn.optim.schedule = Schedule::kCosine;
  cfg.hrrn.optim.grad_clip = 5.0;
  return cfg;
}

// Dotted paths present in `user` but not in `reference`.
void unknown_keys(const json& user, const json& reference, const std::string& prefix,
                  std::vector<std::string>& out) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!reference.is_object() || !reference.contains(key)) {
      out.push_back(path);
    } else if (value.is_object() && reference.at(key).is_object()) {
      unknown_keys(value, reference.at(key), path, out);
    }
  }
}

json::json_pointer pointer(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return json::json_pointer(p);
}

}  // namespace

std::string to_string(Stage stage) { return stage == Stage::kLrscn ? "lrscn" : "hrrn"; }

Stage stage_from_string(const std::string& name) {
  if (name == "lrscn") return Stage::kLrscn;
  if (name == "hrrn") return Stage::kHrrn;
  throw ConfigError("stage must be 'lrscn' or 'hrrn', got '" + name + "'");
}

void OptimConfig::validate() const {
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (!(backbone_lr_ratio >= 0.0)) throw ConfigError("backbone_lr_ratio must be non-negative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be non-negative");
}

void TrainConfig::validate() const {
  try {
    lrscn.model.validate();
    hrrn.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  lrscn.optim.validate();
  hrrn.optim.validate();
  for (double s : lrscn.scales) {
    const double size = s * lrscn.model.backbone.input_size;
    if (!(s > 0.0) || std::abs(size - std::round(size)) > 1e-9 ||
        static_cast<int>(std::round(size)) % lrscn.model.backbone.max_stride() != 0) {
      throw ConfigError("lrscn.scales must map input_size to multiples of the deepest stride");
    }
  }
  if (hrrn.canonical_size != 2 * hrrn.tile_size) throw ConfigError("hrrn.canonical_size must equal 2 * tile_size");
  if (hrrn.tile_size < 1 || hrrn.tile_size % hrrn.model.divisor() != 0) {
    throw ConfigError("hrrn.tile_size must be divisible by 2^depth");
  }
  if (hrrn.noise_kernel != 0) {
    try {
      require_odd_kernel(hrrn.noise_kernel, "hrrn.noise_kernel");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("hrrn.noise_kernel: ") + e.what());
    }
  }
  if (ablation.kernels.empty() || ablation.seeds.empty()) throw ConfigError("ablation needs kernels and seeds");
  for (int k : ablation.kernels) {
    if (k != 0 && (k < 3 || k % 2 == 0)) throw ConfigError("ablation kernels must be 0 or odd >= 3");
  }
  if (ablation.train_scenes < 1 || ablation.test_scenes < 1) throw ConfigError("ablation scene counts must be >= 1");
  if (ablation.scene_size < 32) throw ConfigError("ablation.scene_size must be >= 32");
}

json to_json(const LrscnConfig& c) {
  return {{"backbone",
           {{"stage_channels", c.backbone.stage_channels},
            {"input_size", c.backbone.input_size},
            {"stage_strides", c.backbone.stage_strides},
            {"stem_channels", c.backbone.stem_channels}}},
          {"gcn_kernels", c.gcn.kernels_per_level},
          {"decoder_channels", c.decoder_channels}};
}

json to_json(const HrrnConfig& c) {
  return {{"depth", c.depth},
          {"base_channels", c.base_channels},
          {"input_shortcut_channels", c.input_shortcut_channels},
          {"final_channels", c.final_channels},
          {"power_iterations", c.power_iterations},
          {"overwrite_definite", c.overwrite_definite}};
}

LrscnConfig lrscn_config_from_json(const json& j) {
  LrscnConfig c;
  const json& b = j.at("backbone");
  b.at("stage_channels").get_to(c.backbone.stage_channels);
  b.at("input_size").get_to(c.backbone.input_size);
  b.at("stage_strides").get_to(c.backbone.stage_strides);
  b.at("stem_channels").get_to(c.backbone.stem_channels);
  j.at("gcn_kernels").get_to(c.gcn.kernels_per_level);
  j.at("decoder_channels").get_to(c.decoder_channels);
  return c;
}

HrrnConfig hrrn_config_from_json(const json& j) {
  HrrnConfig c;
  j.at("depth").get_to(c.depth);
  j.at("base_channels").get_to(c.base_channels);
  j.at("input_shortcut_channels").get_to(c.input_shortcut_channels);
  j.at("final_channels").get_to(c.final_channels);
  j.at("power_iterations").get_to(c.power_iterations);
  j.at("overwrite_definite").get_to(c.overwrite_definite);
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"seed", c.seed},
          {"lrscn",
           {{"model", to_json(c.lrscn.model)},
            {"optim", optim_json(c.lrscn.optim)},
            {"multiscale", c.lrscn.multiscale},
            {"scales", c.lrscn.scales}}},
          {"hrrn",
           {{"model", to_json(c.hrrn.model)},
            {"optim", optim_json(c.hrrn.optim)},
            {"canonical_size", c.hrrn.canonical_size},
            {"tile_size", c.hrrn.tile_size},
            {"use_uncertainty", c.hrrn.use_uncertainty},
            {"noise_kernel", c.hrrn.noise_kernel}}},
          {"ablation",
           {{"kernels", c.ablation.kernels},
            {"seeds", c.ablation.seeds},
            {"train_scenes", c.ablation.train_scenes},
            {"test_scenes", c.ablation.test_scenes},
            {"scene_size", c.ablation.scene_size}}}};
}

TrainConfig config_from_json(const json& user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json merged = to_json(defaults());
  std::vector<std::string> unknown;
  unknown_keys(user, merged, "", unknown);
  if (!unknown.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  merged.merge_patch(user);
  TrainConfig c;
  try {
    merged.at("seed").get_to(c.seed);
    const json& l = merged.at("lrscn");
    c.lrscn.model = lrscn_config_from_json(l.at("model"));
    c.lrscn.optim = optim_from(l.at("optim"));
    l.at("multiscale").get_to(c.lrscn.multiscale);
    l.at("scales").get_to(c.lrscn.scales);
    const json& h = merged.at("hrrn");
    c.hrrn.model = hrrn_config_from_json(h.at("model"));
    c.hrrn.optim = optim_from(h.at("optim"));
    h.at("canonical_size").get_to(c.hrrn.canonical_size);
    h.at("tile_size").get_to(c.hrrn.tile_size);
    h.at("use_uncertainty").get_to(c.hrrn.use_uncertainty);
    h.at("noise_kernel").get_to(c.hrrn.noise_kernel);
    const json& a = merged.at("ablation");
    a.at("kernels").get_to(c.ablation.kernels);
    a.at("seeds").get_to(c.ablation.seeds);
    a.at("train_scenes").get_to(c.ablation.train_scenes);
    a.at("test_scenes").get_to(c.ablation.test_scenes);
    a.at("scene_size").get_to(c.ablation.scene_size);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse config file '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

TrainConfig apply_overrides(const TrainConfig& cfg, const std::vector<std::string>& overrides,
                            std::optional<Stage> stage) {
  json j = to_json(cfg);
  std::vector<std::string> unknown;
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    std::vector<std::string> candidates{key};
    const std::string section = stage ? to_string(*stage) : "ablation";
    for (const char* sub : {"", ".optim", ".model"}) candidates.push_back(section + sub + "." + key);
    bool applied = false;
    for (const auto& c : candidates) {
      const auto ptr = pointer(c);
      if (j.contains(ptr) && !j.at(ptr).is_object()) {
        j[ptr] = value;
        applied = true;
        break;
      }
    }
    if (!applied) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown override key(s):";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return config_from_json(j);
}

}  // namespace dsod
