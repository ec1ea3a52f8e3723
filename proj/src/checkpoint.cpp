#include "dsod/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <map>

namespace dsod {
namespace {

constexpr std::array<char, 8> kMagic{'D', 'S', 'O', 'D', 'C', 'K', 'P', 'T'};

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    default: throw CheckpointError("checkpoint: unsupported tensor dtype");
  }
}

torch::ScalarType dtype_from_name(const std::string& name) {
  if (name == "float32") return torch::kFloat32;
  if (name == "float64") return torch::kFloat64;
  if (name == "int64") return torch::kInt64;
  throw CheckpointError("checkpoint: unknown dtype '" + name + "'");
}

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw CheckpointError("checkpoint: truncated header");
  return v;
}

nlohmann::json describe(const NamedTensors& tensors, std::uint64_t& offset) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [name, t] : tensors) {
    const auto nbytes = static_cast<std::uint64_t>(t.numel()) * t.element_size();
    list.push_back({{"name", name},
                    {"dtype", dtype_name(t.scalar_type())},
                    {"shape", t.sizes().vec()},
                    {"offset", offset},
                    {"nbytes", nbytes}});
    offset += nbytes;
  }
  return list;
}

NamedTensors read_tensors(const nlohmann::json& list, const std::vector<char>& payload) {
  NamedTensors out;
  for (const auto& entry : list) {
    const auto offset = entry.at("offset").get<std::uint64_t>();
    const auto nbytes = entry.at("nbytes").get<std::uint64_t>();
    if (offset + nbytes > payload.size()) throw CheckpointError("checkpoint: tensor payload out of range");
    const auto shape = entry.at("shape").get<std::vector<std::int64_t>>();
    torch::Tensor t = torch::empty(shape, torch::TensorOptions().dtype(dtype_from_name(entry.at("dtype"))));
    if (static_cast<std::uint64_t>(t.numel()) * t.element_size() != nbytes) {
      throw CheckpointError("checkpoint: tensor size does not match its shape");
    }
    std::memcpy(t.data_ptr(), payload.data() + offset, nbytes);
    out.emplace_back(entry.at("name").get<std::string>(), t);
  }
  return out;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::kLrscn ? "lrscn" : "hrrn"; }

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "lrscn") return ModelKind::kLrscn;
  if (name == "hrrn") return ModelKind::kHrrn;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::uint64_t offset = 0;
  nlohmann::json header{{"kind", to_string(ckpt.kind)},
                        {"config", ckpt.config},
                        {"step", ckpt.step},
                        {"metrics", ckpt.metrics}};
  header["tensors"] = describe(ckpt.weights, offset);
  header["optimizer"] = describe(ckpt.optimizer, offset);
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("checkpoint: cannot open '" + path.string() + "' for writing");
  os.write(kMagic.data(), kMagic.size());
  write_pod(os, Checkpoint::kVersion);
  write_pod(os, static_cast<std::uint64_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const NamedTensors* group : {&ckpt.weights, &ckpt.optimizer}) {
    for (const auto& item : *group) {
      const torch::Tensor t = item.second.detach().to(torch::kCPU).contiguous();
      os.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size()));
    }
  }
  if (!os) throw CheckpointError("checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::optional<ModelKind> expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open '" + path.string() + "'");
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw CheckpointError("checkpoint: '" + path.string() + "' is not a checkpoint file");
  }
  const auto version = read_pod<std::uint32_t>(is);
  if (version != Checkpoint::kVersion) {
    throw CheckpointError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const auto header_len = read_pod<std::uint64_t>(is);
  std::string text(header_len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(header_len))) throw CheckpointError("checkpoint: truncated header");
  const std::vector<char> payload((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.kind = model_kind_from_string(header.at("kind").get<std::string>());
    ckpt.config = header.at("config");
    ckpt.step = header.at("step").get<std::int64_t>();
    ckpt.metrics = header.at("metrics");
    ckpt.weights = read_tensors(header.at("tensors"), payload);
    ckpt.optimizer = read_tensors(header.at("optimizer"), payload);
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("checkpoint: malformed header: " + std::string(e.what()));
  }
  if (expected && *expected != ckpt.kind) {
    throw CheckpointError("checkpoint: '" + path.string() + "' holds a " + to_string(ckpt.kind) +
                          " model, expected " + to_string(*expected));
  }
  return ckpt;
}

NamedTensors module_state(const torch::nn::Module& module) {
  NamedTensors out;
  for (const auto& item : module.named_parameters()) out.emplace_back(item.key(), item.value().detach().clone());
  for (const auto& item : module.named_buffers()) out.emplace_back(item.key(), item.value().detach().clone());
  return out;
}

void load_module_state(torch::nn::Module& module, const NamedTensors& state) {
  std::map<std::string, torch::Tensor> lookup(state.begin(), state.end());
  torch::NoGradGuard no_grad;
  auto assign = [&](const std::string& name, torch::Tensor& target) {
    const auto it = lookup.find(name);
    if (it == lookup.end()) throw CheckpointError("checkpoint: missing tensor '" + name + "'");
    if (it->second.sizes() != target.sizes()) throw CheckpointError("checkpoint: shape mismatch for '" + name + "'");
    target.copy_(it->second);
    lookup.erase(it);
  };
  for (auto& item : module.named_parameters()) assign(item.key(), item.value());
  for (auto& item : module.named_buffers()) assign(item.key(), item.value());
  if (!lookup.empty()) throw CheckpointError("checkpoint: unexpected tensor '" + lookup.begin()->first + "'");
}

}  // namespace dsod
