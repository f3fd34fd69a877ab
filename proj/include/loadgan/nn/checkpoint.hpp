#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadgan/nn/adam.hpp"
#include "loadgan/nn/layers.hpp"

namespace loadgan::nn {

inline constexpr char kCheckpointMagic[8] = {'L', 'O', 'A', 'D', 'G', 'A', 'N', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ModelBlock {
  std::string name;
  std::vector<LayerSpec> layers;
  std::vector<double> parameters;  // declaration order
  std::optional<OptimizerState> optimizer;

  friend bool operator==(const ModelBlock&, const ModelBlock&);
};

/// Binary layout, all integers and doubles little-endian:
///   magic "LOADGAN1", u32 version
///   u32 meta count, then (str key, str value) pairs, keys sorted
///   u32 model count, per model:
///     str name, u32 layer count, per layer: u8 kind, u8 activation, 5 x u64
///     (in, out, kernel, stride, padding); u64 parameter count, f64 values;
///     u8 has_optimizer, then f64 lr, beta1, beta2, eps, u64 step and per
///     parameter tensor u64 size, f64 first moments, f64 second moments.
/// str = u32 byte length + bytes.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<ModelBlock> models;

  const ModelBlock& model(const std::string& name) const;
};

std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint);
Checkpoint deserialize(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

ModelBlock make_block(const std::string& name, const std::vector<Layer>& layers, const Adam* optimizer = nullptr);
/// Rebuilds layers from a block (specs + parameters).
std::vector<Layer> layers_from_block(const ModelBlock& block);

}  // namespace loadgan::nn
