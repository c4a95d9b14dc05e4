#include "pisa/pipeline/network.hpp"

#include <cmath>
#include <string>

#include "pisa/error.hpp"

namespace pisa {

namespace {

std::size_t exact_sqrt(std::size_t x) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(x))));
  while (r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r * r == x ? r : 0;
}

}  // namespace

Shape NetworkSpec::input_shape(std::size_t l) const {
  if (l == 0) return {input_rows * input_cols};
  const LayerSpec& spec = layers.at(l).spec;
  if (l == 1) {
    if (spec.kind == LayerKind::FC) return {v()};
    const std::size_t side = v() % spec.in_channels == 0 ? exact_sqrt(v() / spec.in_channels) : 0;
    if (side == 0) {
      raise(ErrorKind::ShapeMismatch, "layer-1 outputs (" + std::to_string(v()) + ") do not fold into " +
                                          std::to_string(spec.in_channels) + " square channels");
    }
    return {spec.in_channels, side, side};
  }
  const Shape prev = layers[l - 1].spec.output_shape(input_shape(l - 1));
  if (spec.kind == LayerKind::FC) return {element_count(prev)};
  return prev;
}

void NetworkSpec::validate() const {
  if (layers.size() < 2) raise(ErrorKind::ConfigError, "network needs the sensor layer and at least one more");
  if (input_rows == 0 || input_cols == 0) raise(ErrorKind::ConfigError, "network input size unknown");
  for (const auto& l : layers) l.validate();

  const LayerSpec& l1 = layer1().spec;
  if (l1.kind != LayerKind::FC || l1.weight_bits != 1) {
    raise(ErrorKind::ConfigError, "layer 1 must be a binary-weight FC layer");
  }
  if (l1.in_channels != input_rows * input_cols) {
    raise(ErrorKind::ShapeMismatch, "layer 1 has " + std::to_string(l1.in_channels) + " inputs for a " +
                                        std::to_string(input_rows) + "x" + std::to_string(input_cols) + " sensor");
  }
  for (std::size_t j = 0; j < l1.out_channels; ++j) {
    if (!(l1.bn_scale[j] > 0.0F) || l1.bn_bias[j] != 0.0F) {
      raise(ErrorKind::ConfigError, "layer 1 batch norm must be a positive scale without bias");
    }
  }
  if (layers[1].spec.input_bits != 1) raise(ErrorKind::ConfigError, "layer 2 must take the 1-bit sensor output");

  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const LayerSpec& s = layers[l].spec;
    const unsigned next = layers[l + 1].spec.input_bits;
    const bool ok = next == 1 ? s.activation == Activation::Sign
                              : s.activation == Activation::QuantRelu && s.output_bits == next;
    if (!ok) raise(ErrorKind::ConfigError, "activation of layer " + std::to_string(l + 1) + " does not feed its successor");
  }
  if (layers.back().spec.activation != Activation::Linear) raise(ErrorKind::ConfigError, "last layer must be linear");
  for (std::size_t l = 1; l < layers.size(); ++l) (void)layers[l].spec.output_shape(input_shape(l));
}

NetworkSpec make_network(std::vector<Layer> layers, std::size_t input_rows, std::size_t input_cols, std::string name) {
  NetworkSpec net;
  net.name = std::move(name);
  net.layers = std::move(layers);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerSpec& s = net.layers[l].spec;
    if (l + 1 == net.layers.size()) {
      s.activation = Activation::Linear;
    } else if (net.layers[l + 1].spec.input_bits == 1) {
      s.activation = Activation::Sign;
      s.output_bits = 1;
    } else {
      s.activation = Activation::QuantRelu;
      s.output_bits = net.layers[l + 1].spec.input_bits;
    }
  }
  if (input_rows == 0 || input_cols == 0) {
    const std::size_t k = net.layers.empty() ? 0 : net.layers[0].spec.in_channels;
    const std::size_t side = exact_sqrt(k);
    if (side == 0) raise(ErrorKind::ConfigError, "cannot infer a square input from " + std::to_string(k) + " pixels");
    input_rows = side;
    input_cols = side;
  }
  net.input_rows = input_rows;
  net.input_cols = input_cols;
  net.validate();
  return net;
}

Workload to_workload(const NetworkSpec& net, unsigned adc_bits) {
  Workload w;
  w.name = net.name;
  w.sensor_rows = net.input_rows;
  w.sensor_cols = net.input_cols;
  w.v = net.v();
  w.adc_bits = adc_bits;
  w.layer1_input_bits = net.layer1().spec.input_bits;
  for (std::size_t l = 1; l < net.layers.size(); ++l) {
    w.layers.push_back({"layer" + std::to_string(l + 1), net.layers[l].spec, net.input_shape(l)});
  }
  return w;
}

}  // namespace pisa
