#include <fstream>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

#include "pisa/io/images.hpp"
#include "pisa/io/weight_file.hpp"
#include "pisa/pipeline/network.hpp"
#include "pisa/pipeline/system.hpp"

using namespace pisa;
using testutil::kind_of;

namespace {

const std::filesystem::path kData = PISA_DATA_DIR;

struct Fixture {
  NetworkSpec net = load_weights(kData / "fixtures" / "mnist_bwnn.pisaw");
  ImageSet images = load_images(kData / "mnist" / "t10k-images-idx3-ubyte.gz");
  std::vector<std::uint8_t> labels = load_labels(kData / "mnist" / "t10k-labels-idx1-ubyte.gz");
  nlohmann::json golden = nlohmann::json::parse(std::ifstream(kData / "fixtures" / "mnist_golden.json"));
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<std::uint32_t> codes(const QuantTensor& t) { return {t.data().begin(), t.data().end()}; }

/// Three-layer network: 4x4 sensor, v = 8, then FC 8 -> 4 (2-bit out), FC 4 -> 3.
NetworkSpec tiny_net(std::mt19937_64& rng, float last_scale = 1.0F) {
  std::vector<Layer> layers(3);
  const std::size_t in[] = {16, 8, 4};
  const std::size_t out[] = {8, 4, 3};
  const unsigned ib[] = {8, 1, 2};
  for (std::size_t l = 0; l < 3; ++l) {
    LayerSpec& s = layers[l].spec;
    s.kind = LayerKind::FC;
    s.in_channels = in[l];
    s.out_channels = out[l];
    s.input_bits = ib[l];
    s.bn_scale.assign(out[l], l == 2 ? last_scale : 0.5F);
    s.bn_bias.assign(out[l], l == 0 ? 0.0F : 0.25F);
    layers[l].weights = testutil::random_tensor(rng, {out[l], in[l]}, 1);
  }
  return make_network(std::move(layers));
}

}  // namespace

TEST_CASE("network derivation") {
  std::mt19937_64 rng(1);
  const NetworkSpec net = tiny_net(rng);
  CHECK(net.input_rows == 4);
  CHECK(net.input_cols == 4);
  CHECK(net.v() == 8);
  CHECK(net.classes() == 3);
  CHECK(net.layers[0].spec.activation == Activation::Sign);
  CHECK(net.layers[1].spec.activation == Activation::QuantRelu);
  CHECK(net.layers[1].spec.output_bits == 2);
  CHECK(net.layers[2].spec.activation == Activation::Linear);
  CHECK(net.input_shape(1) == Shape{8});

  std::vector<Layer> bad = net.layers;
  bad[0].spec.weight_bits = 2;
  bad[0].weights = QuantTensor({8, 16}, 2);
  CHECK(kind_of([&] { make_network(bad); }) == ErrorKind::ConfigError);
  bad = net.layers;
  bad[0].spec.bn_bias[0] = 1.0F;
  CHECK(kind_of([&] { make_network(bad); }) == ErrorKind::ConfigError);
  bad = net.layers;
  bad[1].spec.input_bits = 2;
  CHECK(kind_of([&] { make_network(bad); }) == ErrorKind::ConfigError);
  bad = net.layers;
  bad[0].spec.in_channels = 15;
  bad[0].weights = QuantTensor({8, 15}, 1);
  CHECK(kind_of([&] { make_network(bad); }) == ErrorKind::ConfigError);
}

TEST_CASE("fixture frames reproduce the golden vectors") {
  const Fixture& fx = fixture();
  SystemConfig cfg;
  PisaSystem sys(fx.net, cfg);
  PisaSystem fine(fx.net, cfg);
  fine.switch_mode(SensorMode::Sensing);
  for (const auto& g : fx.golden["frames"]) {
    const std::size_t idx = g["index"];
    const Frame& f = fx.images.frames[idx];
    const InferenceResult r = sys.run_coarse(f);
    CHECK(r.layer1_bits.to_string() == g["layer1_bits"].get<std::string>());
    CHECK(codes(r.fmaps.at(1)) == g["layer2_codes"].get<std::vector<std::uint32_t>>());
    const auto logits = g["logits"].get<std::vector<double>>();
    REQUIRE(static_cast<std::size_t>(r.logits.size()) == logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) CHECK(r.logits(static_cast<Eigen::Index>(k)) == logits[k]);
    CHECK(r.predicted == g["predicted"].get<std::size_t>());

    const InferenceResult rf = fine.run_fine(f);
    CHECK(rf.layer1_bits.to_string() == g["fine_layer1_bits"].get<std::string>());
    CHECK(rf.predicted == g["fine_predicted"].get<std::size_t>());
  }
}

TEST_CASE("coarse path equals the digital reference and golden predictions") {
  const Fixture& fx = fixture();
  const auto golden = fx.golden["coarse_predictions"].get<std::vector<std::size_t>>();
  SystemConfig cfg;
  cfg.substrate = Substrate::Functional;
  PisaSystem sys(fx.net, cfg);
  for (std::size_t i = 0; i < 300; ++i) {
    const InferenceResult r = sys.run_coarse(fx.images.frames[i]);
    const InferenceResult ref = reference_coarse(fx.net, fx.images.frames[i], cfg);
    REQUIRE(r.layer1_bits == ref.layer1_bits);
    REQUIRE(r.logits == ref.logits);
    REQUIRE(r.predicted == golden[i]);
  }
}

TEST_CASE("batch inference is deterministic and thread invariant") {
  const Fixture& fx = fixture();
  const std::span<const Frame> frames(fx.images.frames.data(), 64);
  const auto a = infer_batch(fx.net, SystemConfig{}, frames, SensorPath::Coarse, 1);
  const auto b = infer_batch(fx.net, SystemConfig{}, frames, SensorPath::Coarse, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].logits == b[i].logits);
    CHECK(a[i].trace == b[i].trace);
  }
  const std::span<const std::uint8_t> labels(fx.labels.data(), 64);
  CHECK(accuracy(a, labels) == accuracy(b, labels));

  VariationModel noise;
  noise.sigma_pixel = noise.sigma_cbl = 0.3;
  const auto n1 = infer_batch(fx.net, SystemConfig{}, frames, SensorPath::Coarse, 1, &noise);
  const auto n2 = infer_batch(fx.net, SystemConfig{}, frames, SensorPath::Coarse, 3, &noise);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < n1.size(); ++i) {
    CHECK(n1[i].layer1_bits == n2[i].layer1_bits);
    flips += n1[i].layer1_bits == a[i].layer1_bits ? 0 : 1;
  }
  CHECK(flips > 0);
}

TEST_CASE("substrates agree on fixture frames") {
  const Fixture& fx = fixture();
  const std::span<const Frame> frames(fx.images.frames.data(), 20);
  std::vector<std::vector<InferenceResult>> runs;
  for (Substrate s : {Substrate::Functional, Substrate::PnsDRA, Substrate::PnsTRA}) {
    SystemConfig cfg;
    cfg.substrate = s;
    runs.push_back(infer_batch(fx.net, cfg, frames, SensorPath::Fine));
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(runs[0][i].logits == runs[1][i].logits);
    CHECK(runs[0][i].logits == runs[2][i].logits);
    CHECK(runs[1][i].trace.layers.at(0).pns.dra_cycles > 0);
    CHECK(runs[2][i].trace.layers.at(0).pns.tra_steps > 0);
  }
}

TEST_CASE("fine path equals digital inference on the ADC codes") {
  const Fixture& fx = fixture();
  SystemConfig cfg;
  PisaSystem sys(fx.net, cfg);
  sys.switch_mode(SensorMode::Sensing);
  const Frame& f = fx.images.frames[3];
  const InferenceResult r = sys.run_fine(f);

  std::vector<std::uint32_t> v(784);
  for (std::size_t i = 0; i < 784; ++i) {
    const double diff = std::clamp(1.2 * f(static_cast<Eigen::Index>(i / 28), static_cast<Eigen::Index>(i % 28)), 0.0, 1.2);
    v[i] = 255 - static_cast<std::uint32_t>(std::floor(diff / 1.2 * 255.0 + 0.5));
  }
  const InferenceResult ref = run_backend(fx.net, QuantTensor({784}, 8, v), 0, Substrate::Functional);
  CHECK(r.logits == ref.logits);
  CHECK(r.trace.adc_samples == 784);
  CHECK(r.trace.cp_macs == 0);
  const InferenceResult c = PisaSystem(fx.net, cfg).run_coarse(f);
  CHECK(c.trace.adc_samples == 0);
  CHECK(c.trace.cp_macs == 784 * 256);
  CHECK(c.trace.pns_link_bits == 256);
}

TEST_CASE("mode switching") {
  std::mt19937_64 rng(3);
  PisaSystem sys(tiny_net(rng), SystemConfig{});
  const Frame f = Frame::Constant(4, 4, 0.2);
  CHECK(kind_of([&] { sys.run_fine(f); }) == ErrorKind::ModeError);
  sys.switch_mode(SensorMode::Sensing);
  CHECK(kind_of([&] { sys.run_coarse(f); }) == ErrorKind::ModeError);
  CHECK_NOTHROW(sys.run_fine(f));
}

TEST_CASE("adaptive switching follows the confidence threshold") {
  std::mt19937_64 rng(3);
  const NetworkSpec net = tiny_net(rng);
  const Frame f = Frame::Constant(4, 4, 0.2);
  SystemConfig always;
  always.switch_threshold = 0.0;
  const AdaptiveResult a = PisaSystem(net, always).run_adaptive(f);
  CHECK(a.fine.has_value());
  CHECK(&a.final() == &*a.fine);
  CHECK(a.fine->path == SensorPath::Fine);
  SystemConfig never;
  never.switch_threshold = 1.1;
  PisaSystem sys(net, never);
  const AdaptiveResult b = sys.run_adaptive(f);
  CHECK_FALSE(b.fine.has_value());
  CHECK(b.confidence == doctest::Approx(softmax_max(b.coarse.logits)));
  CHECK(sys.sensor().mode() == SensorMode::Compute);
}

TEST_CASE("equal logits pick class 0") {
  std::mt19937_64 rng(3);
  const NetworkSpec net = tiny_net(rng, 0.0F);
  const InferenceResult r = PisaSystem(net, SystemConfig{}).run_coarse(Frame::Zero(4, 4));
  CHECK(r.logits.isConstant(r.logits(0)));
  CHECK(r.predicted == 0);
  Eigen::VectorXd v(3);
  v << 1.0, 3.0, 3.0;
  CHECK(argmax(v) == 1);
}

TEST_CASE("capture resizes frames to the sensor") {
  std::mt19937_64 rng(3);
  PisaSystem sys(tiny_net(rng), SystemConfig{});
  CHECK_NOTHROW(sys.run_coarse(Frame::Constant(8, 8, 0.5)));
  CHECK(sys.sensor().pixel(0, 0).v_pd == doctest::Approx(0.6));
  const Frame r = resize_bilinear(Frame::Constant(3, 5, 0.25), 7, 2);
  CHECK(r.rows() == 7);
  CHECK((r.array() - 0.25).abs().maxCoeff() < 1e-15);
}

TEST_CASE("requantize rounds to the nearest level") {
  CHECK(requantize(255, 8, 4) == 15);
  CHECK(requantize(0, 8, 4) == 0);
  CHECK(requantize(8, 8, 4) == 0);
  CHECK(requantize(9, 8, 4) == 1);
  CHECK(requantize(77, 8, 8) == 77);
}
