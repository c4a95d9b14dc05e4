#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pisa/conv/engine.hpp"
#include "pisa/core/tensor.hpp"
#include "pisa/perf/workload.hpp"

namespace pisa {

/// Ordered layers; layer 0 is the in-sensor global FC layer with v outputs.
struct NetworkSpec {
  std::string name = "network";
  std::vector<Layer> layers;
  std::size_t input_rows = 0;
  std::size_t input_cols = 0;

  const Layer& layer1() const { return layers.at(0); }
  std::size_t v() const { return layers.at(0).spec.out_channels; }
  std::size_t classes() const { return layers.back().spec.out_channels; }
  /// Input shape of layer l (0-based) when fed from the previous layer.
  Shape input_shape(std::size_t l) const;

  /// Checks the layer-1 contract and inter-layer shape consistency.
  void validate() const;
};

/// Assigns each layer's activation from its successor: Sign if the next
/// layer takes 1-bit inputs, QuantRelu into the next input width otherwise,
/// Linear logits for the last layer. Infers a square input if dims are 0.
NetworkSpec make_network(std::vector<Layer> layers, std::size_t input_rows = 0, std::size_t input_cols = 0,
                         std::string name = "network");

/// Perf workload equivalent of the network for a sensor of the same size.
Workload to_workload(const NetworkSpec& net, unsigned adc_bits);

}  // namespace pisa
