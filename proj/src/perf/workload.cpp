#include "pisa/perf/workload.hpp"

#include <string>

namespace pisa {

const char* to_string(SensorPath p) noexcept { return p == SensorPath::Coarse ? "coarse" : "fine"; }

namespace {

LayerSpec make(LayerKind kind, std::size_t in, std::size_t out, std::size_t k, std::size_t stride, std::size_t pad,
               unsigned wb, unsigned ib) {
  LayerSpec s;
  s.kind = kind;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel_h = k;
  s.kernel_w = k;
  s.stride = stride;
  s.padding = pad;
  s.weight_bits = wb;
  s.input_bits = ib;
  s.bn_scale.assign(out, 1.0F);
  s.bn_bias.assign(out, 0.0F);
  s.activation = Activation::QuantRelu;
  s.output_bits = ib;
  return s;
}

OffSensorLayer off_sensor(const std::string& name, const LayerSpec& spec, const Shape& input, bool on_pns) {
  OffSensorLayer l;
  l.name = name;
  l.input_bits = spec.input_bits;
  l.weight_bits = spec.weight_bits;
  l.macs = static_cast<std::uint64_t>(spec.kernel_size()) * spec.out_channels * spec.output_positions(input);
  if (on_pns) l.pns = plan_layer(spec, input, Substrate::PnsDRA);
  return l;
}

}  // namespace

Workload svhn_workload(unsigned input_bits, unsigned weight_bits) {
  Workload w;
  w.name = "svhn-topology W:I=" + std::to_string(weight_bits) + ":" + std::to_string(input_bits);
  const unsigned n = weight_bits;
  const unsigned m = input_bits;
  w.layers = {
      {"conv2", make(LayerKind::Conv, 4, 64, 3, 1, 1, n, 1), {4, 8, 8}},
      {"conv3", make(LayerKind::Conv, 64, 64, 3, 1, 1, n, m), {64, 8, 8}},
      {"conv4", make(LayerKind::Conv, 64, 128, 3, 2, 1, n, m), {64, 8, 8}},
      {"conv5", make(LayerKind::Conv, 128, 128, 3, 1, 1, n, m), {128, 4, 4}},
      {"conv6", make(LayerKind::Conv, 128, 256, 3, 2, 1, n, m), {128, 4, 4}},
      {"fc7", make(LayerKind::FC, 1024, 256, 1, 1, 0, n, m), {1024}},
      {"fc8", make(LayerKind::FC, 256, 10, 1, 1, 0, n, m), {256}},
  };
  w.layers.back().spec.activation = Activation::Linear;
  return w;
}

LayerSpec layer1_as_fc(const Workload& w, unsigned input_bits) {
  return make(LayerKind::FC, w.sensor_rows * w.sensor_cols, w.v, 1, 1, 0, 1, input_bits);
}

Trace build_trace(const Workload& w, Platform platform, SensorPath path) {
  Trace t;
  t.workload = w.name;
  t.frames = 1;
  const std::uint64_t pixels = w.sensor_rows * w.sensor_cols;
  const bool pns = is_pns(platform);
  const bool readout = platform == Platform::BaselineCpu || path == SensorPath::Fine;

  t.pixels_sensed = pixels;
  std::uint64_t out_bits = 0;
  if (readout) {
    t.pixel_rows_read = w.sensor_rows;
    t.adc_samples = pixels;
    t.adc_rows = w.sensor_rows;
    t.sensing_frames = 1;
    out_bits = pixels * w.adc_bits;
    const unsigned bits = platform == Platform::BaselineCpu ? w.adc_bits : w.layer1_input_bits;
    t.layers.push_back(off_sensor("layer1", layer1_as_fc(w, bits), {pixels}, pns));
  } else {
    t.cp_macs = pixels * w.v;
    t.nvm_reads = pixels * w.v;
    t.sensor_compute_cycles = 1;
    t.processing_frames = 1;
    out_bits = w.v;
  }

  if (pns) {
    t.pns_link_bits = out_bits;
    t.pns_frames = 1;
  } else {
    t.host_link_bits = out_bits;
    t.host_link_frames = 1;
  }
  for (const auto& l : w.layers) t.layers.push_back(off_sensor(l.name, l.spec, l.input, pns));
  return t;
}

}  // namespace pisa
