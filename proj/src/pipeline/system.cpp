#include "pisa/pipeline/system.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "pisa/error.hpp"

namespace pisa {

std::size_t argmax(const Eigen::VectorXd& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

double softmax_max(const Eigen::VectorXd& logits) {
  if (logits.size() == 0) return 0.0;
  const double top = logits.maxCoeff();
  return 1.0 / (logits.array() - top).exp().sum();
}

std::uint32_t requantize(std::uint32_t code, unsigned from_bits, unsigned to_bits) noexcept {
  if (from_bits == to_bits) return code;
  const double from_max = static_cast<double>((std::uint64_t{1} << from_bits) - 1);
  const double to_max = static_cast<double>((std::uint64_t{1} << to_bits) - 1);
  return static_cast<std::uint32_t>(std::floor(static_cast<double>(code) * to_max / from_max + 0.5));
}

namespace {

OffSensorLayer off_sensor_record(const NetworkSpec& net, std::size_t l, const LayerTally& tally) {
  OffSensorLayer rec;
  rec.name = "layer" + std::to_string(l + 1);
  rec.macs = tally.macs;
  rec.input_bits = net.layers[l].spec.input_bits;
  rec.weight_bits = net.layers[l].spec.weight_bits;
  rec.pns = tally;
  return rec;
}

BitVector bits_of(const QuantTensor& t) {
  BitVector b(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) b.set(i, t[i] != 0);
  return b;
}

QuantTensor tensor_of(const BitVector& b, Shape shape) {
  std::vector<std::uint32_t> d(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) d[i] = b.get(i) ? 1U : 0U;
  return QuantTensor(std::move(shape), 1, std::move(d));
}

std::vector<BinaryWeightPlane> sensor_planes(const NetworkSpec& net) {
  const Layer& l1 = net.layer1();
  const std::size_t pixels = l1.spec.in_channels;
  std::vector<BinaryWeightPlane> planes;
  planes.reserve(l1.spec.out_channels);
  for (std::size_t j = 0; j < l1.spec.out_channels; ++j) {
    BitVector bits(pixels);
    for (std::size_t i = 0; i < pixels; ++i) bits.set(i, l1.weights[j * pixels + i] != 0);
    planes.emplace_back(Shape{net.input_rows, net.input_cols}, std::move(bits));
  }
  return planes;
}

CfpParams sized_params(const NetworkSpec& net, CfpParams p) {
  p.rows = net.input_rows;
  p.cols = net.input_cols;
  p.v = net.v();
  return p;
}

}  // namespace

InferenceResult run_backend(const NetworkSpec& net, QuantTensor input, std::size_t start, Substrate substrate) {
  InferenceResult r;
  QuantTensor x = std::move(input);
  for (std::size_t l = start; l < net.layers.size(); ++l) {
    const Shape shape = net.input_shape(l);
    if (x.shape() != shape) x = x.reshaped(shape);
    LayerResult lr = run_layer(x, net.layers[l], substrate);
    r.trace.layers.push_back(off_sensor_record(net, l, lr.tally));
    if (l + 1 == net.layers.size()) {
      r.logits = std::move(lr.values);
    } else {
      if (l == 0) r.layer1_bits = bits_of(lr.fmap);
      r.fmaps.push_back(lr.fmap);
      x = std::move(lr.fmap);
    }
  }
  r.predicted = argmax(r.logits);
  return r;
}

PisaSystem::PisaSystem(NetworkSpec net, SystemConfig config)
    : net_(std::move(net)), config_(config), sensor_(sized_params(net_, config.sensor), config.sensor_config) {
  net_.validate();
  config_.sensor = sensor_.params();
  const auto planes = sensor_planes(net_);
  sensor_.program_weights(planes);
}

void PisaSystem::capture(const Frame& frame) {
  sensor_.reset();
  if (static_cast<std::size_t>(frame.rows()) == sensor_.rows() && static_cast<std::size_t>(frame.cols()) == sensor_.cols()) {
    sensor_.expose(frame);
  } else {
    sensor_.expose(resize_bilinear(frame, sensor_.rows(), sensor_.cols()));
  }
}

InferenceResult PisaSystem::run_coarse(const Frame& frame) {
  if (sensor_.mode() != SensorMode::Compute) raise(ErrorKind::ModeError, "coarse inference requires compute mode");
  const std::uint64_t cycles0 = sensor_.compute_cycles();
  capture(frame);
  const Eigen::VectorXd currents = perturbation_ ? sensor_.compute_mac(*perturbation_) : sensor_.compute_mac();
  const BitVector bits = sensor_.sign_activation(currents);

  InferenceResult r = run_backend(net_, tensor_of(bits, net_.input_shape(1)), 1, config_.substrate);
  r.path = SensorPath::Coarse;
  r.layer1_bits = bits;
  r.fmaps.insert(r.fmaps.begin(), tensor_of(bits, {bits.size()}));

  Trace& t = r.trace;
  const std::uint64_t pixels = sensor_.rows() * sensor_.cols();
  t.workload = net_.name;
  t.frames = 1;
  t.pixels_sensed = pixels;
  t.sensor_compute_cycles = sensor_.compute_cycles() - cycles0;
  t.cp_macs = t.sensor_compute_cycles * pixels * sensor_.v();
  t.nvm_reads = t.cp_macs;
  t.processing_frames = 1;
  t.pns_link_bits = bits.size();
  t.pns_frames = 1;
  return r;
}

InferenceResult PisaSystem::run_fine(const Frame& frame) {
  if (sensor_.mode() != SensorMode::Sensing) raise(ErrorKind::ModeError, "fine inference requires sensing mode");
  const std::uint64_t conversions0 = sensor_.adc_conversions();
  capture(frame);
  const unsigned adc = sensor_.config().adc_bits;
  const unsigned m = net_.layer1().spec.input_bits;
  const std::uint32_t top = static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1);
  std::vector<std::uint32_t> codes;
  codes.reserve(sensor_.rows() * sensor_.cols());
  for (std::size_t row = 0; row < sensor_.rows(); ++row) {
    for (std::uint32_t c : sensor_.sense_readout(row)) {
      // CDS codes measure the voltage drop; layer 1 expects V_PD.
      codes.push_back(top - requantize(c, adc, m));
    }
  }
  const std::size_t count = codes.size();
  InferenceResult r = run_backend(net_, QuantTensor({count}, m, std::move(codes)), 0, config_.substrate);
  r.path = SensorPath::Fine;

  Trace& t = r.trace;
  const std::uint64_t pixels = sensor_.rows() * sensor_.cols();
  t.workload = net_.name;
  t.frames = 1;
  t.pixels_sensed = pixels;
  t.pixel_rows_read = sensor_.rows();
  t.adc_samples = sensor_.adc_conversions() - conversions0;
  t.adc_rows = sensor_.rows();
  t.sensing_frames = 1;
  t.pns_link_bits = t.adc_samples * adc;
  t.pns_frames = 1;
  return r;
}

AdaptiveResult PisaSystem::run_adaptive(const Frame& frame) {
  AdaptiveResult a;
  switch_mode(SensorMode::Compute);
  a.coarse = run_coarse(frame);
  a.confidence = softmax_max(a.coarse.logits);
  if (a.confidence >= config_.switch_threshold) {
    switch_mode(SensorMode::Sensing);
    a.fine = run_fine(frame);
    switch_mode(SensorMode::Compute);
  }
  return a;
}

Frame resize_bilinear(const Frame& frame, std::size_t rows, std::size_t cols) {
  if (frame.size() == 0 || rows == 0 || cols == 0) raise(ErrorKind::ShapeMismatch, "cannot resize an empty frame");
  const auto src_r = static_cast<double>(frame.rows());
  const auto src_c = static_cast<double>(frame.cols());
  Frame out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = std::clamp((static_cast<double>(r) + 0.5) * src_r / static_cast<double>(rows) - 0.5, 0.0, src_r - 1);
    const auto y0 = static_cast<Eigen::Index>(std::floor(y));
    const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, frame.rows() - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = std::clamp((static_cast<double>(c) + 0.5) * src_c / static_cast<double>(cols) - 0.5, 0.0, src_c - 1);
      const auto x0 = static_cast<Eigen::Index>(std::floor(x));
      const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, frame.cols() - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = frame(y0, x0) * (1 - fx) + frame(y0, x1) * fx;
      const double bottom = frame(y1, x0) * (1 - fx) + frame(y1, x1) * fx;
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = top * (1 - fy) + bottom * fy;
    }
  }
  return out;
}

std::vector<InferenceResult> infer_batch(const NetworkSpec& net, const SystemConfig& config,
                                         std::span<const Frame> frames, SensorPath path, unsigned threads,
                                         const VariationModel* noise) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(frames.size(), 1)));
  std::vector<InferenceResult> results(frames.size());
  std::vector<std::exception_ptr> errors(threads);

  auto work = [&](unsigned w) {
    try {
      PisaSystem sys(net, config);
      sys.switch_mode(path == SensorPath::Coarse ? SensorMode::Compute : SensorMode::Sensing);
      for (std::size_t i = w; i < frames.size(); i += threads) {
        if (noise != nullptr) {
          sys.set_perturbation(sample_sensor_perturbation(*noise, sys.sensor().v(), sys.sensor().rows() * sys.sensor().cols(), i));
        }
        results[i] = path == SensorPath::Coarse ? sys.run_coarse(frames[i]) : sys.run_fine(frames[i]);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

double accuracy(std::span<const InferenceResult> results, std::span<const std::uint8_t> labels) {
  if (results.size() != labels.size()) raise(ErrorKind::ShapeMismatch, "result and label counts differ");
  if (results.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < results.size(); ++i) hit += results[i].predicted == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(results.size());
}

InferenceResult reference_coarse(const NetworkSpec& net, const Frame& frame, const SystemConfig& config) {
  const CfpParams p = sized_params(net, config.sensor);
  const Frame f = static_cast<std::size_t>(frame.rows()) == p.rows && static_cast<std::size_t>(frame.cols()) == p.cols
                      ? frame
                      : resize_bilinear(frame, p.rows, p.cols);
  const Layer& l1 = net.layer1();
  const std::size_t pixels = p.rows * p.cols;
  std::vector<double> v_pd(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    const double x = f(static_cast<Eigen::Index>(i / p.cols), static_cast<Eigen::Index>(i % p.cols));
    v_pd[i] = std::clamp(p.v_dd - config.sensor_config.exposure_gain * x, 0.0, p.v_dd);
  }
  BitVector bits(net.v());
  for (std::size_t j = 0; j < net.v(); ++j) {
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
      if (l1.weights[j * pixels + i] != 0) {
        plus += v_pd[i];
      } else {
        minus += v_pd[i];
      }
    }
    bits.set(j, plus > minus);
  }
  InferenceResult r = run_backend(net, tensor_of(bits, net.input_shape(1)), 1, Substrate::Functional);
  r.layer1_bits = bits;
  r.fmaps.insert(r.fmaps.begin(), tensor_of(bits, {bits.size()}));
  return r;
}

}  // namespace pisa
