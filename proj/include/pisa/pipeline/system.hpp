#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pisa/conv/engine.hpp"
#include "pisa/perf/account.hpp"
#include "pisa/perf/workload.hpp"
#include "pisa/pipeline/network.hpp"
#include "pisa/sensor/cfp_array.hpp"
#include "pisa/variation/monte_carlo.hpp"

namespace pisa {

struct SystemConfig {
  CfpParams sensor;  ///< rows, cols and v are overridden by the network
  SensorConfig sensor_config;
  Substrate substrate = Substrate::PnsDRA;
  /// Coarse softmax confidence that triggers the fine path.
  double switch_threshold = 0.5;
};

struct InferenceResult {
  SensorPath path = SensorPath::Coarse;
  Eigen::VectorXd logits;
  std::size_t predicted = 0;
  /// Output of layer 1 as fed to layer 2.
  BitVector layer1_bits;
  /// Activations of layers 1..L-1 in order.
  std::vector<QuantTensor> fmaps;
  Trace trace;
};

struct AdaptiveResult {
  InferenceResult coarse;
  std::optional<InferenceResult> fine;
  double confidence = 0.0;
  /// Fine result when the switch fired, coarse otherwise.
  const InferenceResult& final() const { return fine ? *fine : coarse; }
};

/// Lowest index among maximal entries.
std::size_t argmax(const Eigen::VectorXd& v);
double softmax_max(const Eigen::VectorXd& logits);

/// Requantizes adc_bits codes to `bits` by rounding to the nearest level.
std::uint32_t requantize(std::uint32_t code, unsigned from_bits, unsigned to_bits) noexcept;

/// Layers 2..L (start = 1) or 1..L (start = 0) on the chosen substrate.
InferenceResult run_backend(const NetworkSpec& net, QuantTensor input, std::size_t start, Substrate substrate);

/// Sensor plus near-sensor memory unit running one network.
class PisaSystem {
 public:
  PisaSystem(NetworkSpec net, SystemConfig config);

  const NetworkSpec& network() const noexcept { return net_; }
  const SystemConfig& config() const noexcept { return config_; }
  CfpArray& sensor() noexcept { return sensor_; }
  const CfpArray& sensor() const noexcept { return sensor_; }

  void switch_mode(SensorMode mode) noexcept { sensor_.set_mode(mode); }
  /// Applied to every subsequent coarse MAC; nullopt restores the ideal array.
  void set_perturbation(std::optional<SensorPerturbation> p) { perturbation_ = std::move(p); }

  /// Resizes if needed, then resets and exposes the sensor.
  void capture(const Frame& frame);

  /// Layer 1 in the sensor, layers 2..L on the PNS. Needs compute mode.
  InferenceResult run_coarse(const Frame& frame);
  /// Full ADC readout, every layer on the PNS. Needs sensing mode.
  InferenceResult run_fine(const Frame& frame);
  /// Coarse pass; switches to sensing and runs the fine pass when the
  /// coarse confidence reaches the threshold, then returns to compute mode.
  AdaptiveResult run_adaptive(const Frame& frame);

 private:
  NetworkSpec net_;
  SystemConfig config_;
  CfpArray sensor_;
  std::optional<SensorPerturbation> perturbation_;
};

/// Bilinear resampling onto rows x cols with edge clamping.
Frame resize_bilinear(const Frame& frame, std::size_t rows, std::size_t cols);

/// Runs frames on per-thread system instances; results are independent of
/// the thread count. With `noise`, coarse frame i uses the sensor
/// perturbation of trial i. threads = 0 uses the hardware concurrency.
std::vector<InferenceResult> infer_batch(const NetworkSpec& net, const SystemConfig& config,
                                         std::span<const Frame> frames, SensorPath path, unsigned threads = 0,
                                         const VariationModel* noise = nullptr);

/// Fraction of predictions equal to labels.
double accuracy(std::span<const InferenceResult> results, std::span<const std::uint8_t> labels);

/// Conventional digital reference: sign(W x) on the ideal photodiode
/// voltages in layer 1, then the Functional substrate.
InferenceResult reference_coarse(const NetworkSpec& net, const Frame& frame, const SystemConfig& config);

}  // namespace pisa
