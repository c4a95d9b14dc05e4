#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pisa/conv/engine.hpp"
#include "pisa/perf/account.hpp"

namespace pisa {

enum class SensorPath { Coarse, Fine };
const char* to_string(SensorPath p) noexcept;

struct WorkloadLayer {
  std::string name;
  LayerSpec spec;
  Shape input;
};

/// Shape-only description of a network for perf accounting.
struct Workload {
  std::string name;
  std::size_t sensor_rows = 128;
  std::size_t sensor_cols = 128;
  std::size_t v = 256;
  unsigned adc_bits = 8;
  /// Precision of layer 1 when it runs off-sensor on the fine path.
  unsigned layer1_input_bits = 8;
  /// Layers 2..L.
  std::vector<WorkloadLayer> layers;
};

/// 128x128 sensor, 256 in-sensor outputs viewed as 4x8x8, five binary-weight
/// conv layers and two FC layers at the given input precision.
Workload svhn_workload(unsigned input_bits, unsigned weight_bits = 1);

/// The in-sensor layer as an ordinary FC layer over the frame.
LayerSpec layer1_as_fc(const Workload& w, unsigned input_bits);

/// Counts of one frame of `w` executed on `platform`. The baseline reads the
/// full frame out and runs every layer on the host at adc_bits precision.
Trace build_trace(const Workload& w, Platform platform, SensorPath path = SensorPath::Coarse);

}  // namespace pisa
