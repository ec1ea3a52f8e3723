#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

namespace dsod {

enum class ModelKind { kLrscn, kHrrn };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

/// Container layout: 8-byte magic "DSODCKPT", uint32 format version,
/// uint64 header length, UTF-8 JSON header, then the raw tensor payload
/// (little-endian, contiguous). The header lists every tensor's name, dtype,
/// shape, byte offset and byte count.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  ModelKind kind = ModelKind::kLrscn;
  nlohmann::json config = nlohmann::json::object();   // model + training config
  std::int64_t step = 0;
  nlohmann::json metrics = nlohmann::json::object();  // snapshot at save time
  NamedTensors weights;                               // parameters and buffers
  NamedTensors optimizer;                             // momentum buffers
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws CheckpointError on a malformed file or a kind other than
/// `expected` (when given).
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<ModelKind> expected = std::nullopt);

/// Parameters followed by buffers, keyed by their module path.
NamedTensors module_state(const torch::nn::Module& module);
/// Copies `state` into the module. Every module tensor must be present with
/// a matching shape; extra entries are an error too.
void load_module_state(torch::nn::Module& module, const NamedTensors& state);

}  // namespace dsod
