#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pisa/conv/engine.hpp"
#include "pisa/pipeline/network.hpp"

namespace pisa {

/// Binary network file, little-endian:
///   "PISAW1\0", version u8 (= 1), layer count u32,
///   per layer: kind u8 (0 conv, 1 fc), in_ch u16, out_ch u16, kh u8, kw u8,
///              stride u8, pad u8, weight_bits u8, input_bits u8,
///   then per layer: weight_bits planes of out*in*kh*kw bits (plane-major,
///   row-major, LSB-first, each plane zero-padded to a byte), then
///   out_ch f32 bn_scale and out_ch f32 bn_bias.
inline constexpr char kWeightMagic[7] = {'P', 'I', 'S', 'A', 'W', '1', '\0'};
inline constexpr std::uint8_t kWeightVersion = 1;
inline constexpr std::size_t kWeightPreamble = 12;
inline constexpr std::size_t kLayerHeaderBytes = 11;

/// Byte size of one layer's payload (planes and batch-norm vectors).
std::size_t layer_payload_bytes(const LayerSpec& spec);

std::vector<std::uint8_t> serialize_layers(std::span<const Layer> layers);
/// Layers with activations left at their defaults; see make_network.
std::vector<Layer> parse_layers(std::span<const std::uint8_t> bytes);

NetworkSpec load_weights(const std::filesystem::path& path);
void save_weights(const NetworkSpec& net, const std::filesystem::path& path);

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace pisa
