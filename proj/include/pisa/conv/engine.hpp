#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pisa/core/bits.hpp"
#include "pisa/core/tensor.hpp"
#include "pisa/dram/subarray.hpp"

namespace pisa {

enum class LayerKind : std::uint8_t { Conv = 0, FC = 1 };
enum class Activation { Sign, QuantRelu, Linear };
enum class Substrate { Functional, PnsDRA, PnsTRA };

const char* to_string(LayerKind k) noexcept;
const char* to_string(Activation a) noexcept;
const char* to_string(Substrate s) noexcept;

struct LayerSpec {
  LayerKind kind = LayerKind::FC;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  unsigned weight_bits = 1;  ///< N
  unsigned input_bits = 1;   ///< M
  std::vector<float> bn_scale;
  std::vector<float> bn_bias;
  Activation activation = Activation::Sign;
  /// Width of a QuantRelu output; ignored by the other activations.
  unsigned output_bits = 1;

  void validate() const;
  std::size_t kernel_size() const noexcept { return in_channels * kernel_h * kernel_w; }
  /// Shape of the output fmap for a given input shape.
  Shape output_shape(const Shape& input) const;
  std::size_t output_positions(const Shape& input) const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Spec plus unsigned weight codes of shape [out, in, kh, kw] (FC: [out, in]).
/// Code u stands for the signed level 2u - (2^N - 1); N = 1 gives {-1, +1}.
struct Layer {
  LayerSpec spec;
  QuantTensor weights;

  void validate() const;
  int weight_level(std::size_t i) const noexcept;
  friend bool operator==(const Layer&, const Layer&) = default;
};

std::uint64_t bitcount(const BitVector& row) noexcept;
std::uint64_t bitcount(const DramRow& row) noexcept;

/// acc + (count << (m + n)).
std::uint64_t shift_accumulate(std::uint64_t count, unsigned m, unsigned n, std::uint64_t acc);

/// sum_m sum_n 2^(m+n) * bitcount(AND(C_n(W), C_m(I))) over unsigned tensors.
std::uint64_t bitwise_dot(const BitPlaneTensor& input, const BitPlaneTensor& kernel);

/// Hardware operation counts of one layer on the PNS.
struct LayerTally {
  std::uint64_t ands = 0;
  std::uint64_t row_pairs = 0;
  std::uint64_t row_writes = 0;
  std::uint64_t row_reads = 0;
  std::uint64_t bitcount_rows = 0;
  std::uint64_t shift_adds = 0;
  std::uint64_t row_copies = 0;
  std::uint64_t dra_cycles = 0;
  std::uint64_t tra_steps = 0;
  std::uint64_t groups = 0;
  std::uint64_t chunks = 0;
  std::uint64_t macs = 0;  ///< K * out_channels * positions, substrate independent

  LayerTally& operator+=(const LayerTally& o) noexcept;
  friend bool operator==(const LayerTally&, const LayerTally&) = default;
};

struct LayerResult {
  QuantTensor fmap;        ///< empty for Linear layers
  Eigen::VectorXd values;  ///< y = bn_scale * val + bn_bias, channel-major
  std::vector<std::int64_t> raw;  ///< signed dot products before batch norm
  LayerTally tally;
};

/// Row mapping of a layer onto one sub-array.
struct LayerMapping {
  std::size_t kernel = 0;             ///< K
  std::size_t positions = 0;          ///< P
  std::size_t windows_per_row = 0;    ///< 0 when a window spans several rows
  std::size_t segments = 1;           ///< rows per window
  std::size_t chunks = 0;             ///< input row groups C
  std::size_t weight_rows = 1;        ///< rows per (channel, plane)
  std::size_t channels_per_group = 0;
  std::size_t groups = 0;
};

LayerMapping map_layer(const LayerSpec& spec, const Shape& input,
                       std::size_t data_rows = DramSubArray::kDataRows);

/// Closed-form PNS tally for one layer. Equals the tally of run_layer on the
/// matching Pns substrate.
LayerTally plan_layer(const LayerSpec& spec, const Shape& input, Substrate substrate,
                      std::size_t data_rows = DramSubArray::kDataRows);

LayerResult run_layer(const QuantTensor& input, const Layer& layer, Substrate substrate);

/// Batch norm followed by the layer's activation.
double batch_norm(const LayerSpec& spec, std::size_t channel, std::int64_t val) noexcept;
std::uint32_t activate(const LayerSpec& spec, double y) noexcept;

/// Window k = (c * kh + dy) * kw + dx of output position p (row-major over
/// the output grid); zero outside the padded input.
std::vector<std::uint32_t> extract_window(const QuantTensor& input, const LayerSpec& spec, std::size_t position);

}  // namespace pisa
