#include <filesystem>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "pisa/io/config.hpp"
#include "pisa/io/images.hpp"
#include "pisa/io/report.hpp"
#include "pisa/io/weight_file.hpp"
#include "pisa/perf/workload.hpp"

using namespace pisa;
using testutil::kind_of;

namespace {

const std::filesystem::path kData = PISA_DATA_DIR;
const std::filesystem::path kConfig = kData.parent_path() / "config";

std::size_t format_offset(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_layers(bytes);
  } catch (const FormatError& e) {
    return e.offset();
  }
  return SIZE_MAX;
}

Layer layer(LayerKind kind, std::size_t in, std::size_t out, std::size_t k, std::size_t stride, std::size_t pad,
            unsigned wb, unsigned ib, std::vector<std::uint32_t> codes, std::vector<float> scale,
            std::vector<float> bias) {
  Layer l;
  l.spec.kind = kind;
  l.spec.in_channels = in;
  l.spec.out_channels = out;
  l.spec.kernel_h = l.spec.kernel_w = k;
  l.spec.stride = stride;
  l.spec.padding = pad;
  l.spec.weight_bits = wb;
  l.spec.input_bits = ib;
  l.spec.bn_scale = std::move(scale);
  l.spec.bn_bias = std::move(bias);
  const Shape s = kind == LayerKind::FC ? Shape{out, in} : Shape{out, in, k, k};
  l.weights = QuantTensor(s, wb, std::move(codes));
  return l;
}

std::vector<Layer> tiny_golden_layers() {
  std::vector<std::uint32_t> cw(54), fw(60);
  for (std::uint32_t i = 0; i < 54; ++i) cw[i] = (i * 7 + 1) % 4;
  for (std::uint32_t i = 0; i < 60; ++i) fw[i] = (i * 5 + 3) % 2;
  return {layer(LayerKind::Conv, 2, 3, 3, 2, 1, 2, 1, cw, {0.5F, -1.25F, 2.0F}, {0.0F, 1.5F, -3.0F}),
          layer(LayerKind::FC, 12, 5, 1, 1, 0, 1, 4, fw, {1, 2, 3, 4, 5}, {-0.5F, 0.25F, 0.0F, 1e-3F, -7.0F})};
}

std::vector<Layer> random_layers(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(1, 6);
  std::vector<Layer> out;
  const std::size_t n = static_cast<std::size_t>(pick(rng));
  for (std::size_t i = 0; i < n; ++i) {
    const bool conv = (rng() & 1U) != 0;
    const std::size_t in = static_cast<std::size_t>(pick(rng)) * 3;
    const std::size_t o = static_cast<std::size_t>(pick(rng)) * 2 + 1;
    const std::size_t k = conv ? static_cast<std::size_t>(pick(rng) % 4 + 1) : 1;
    const unsigned wb = static_cast<unsigned>(pick(rng) % 3 + 1);
    const Shape s = conv ? Shape{o, in, k, k} : Shape{o, in};
    std::vector<float> sc(o), bi(o);
    for (auto& f : sc) f = static_cast<float>(rng() % 1000) / 7.0F - 50.0F;
    for (auto& f : bi) f = static_cast<float>(rng() % 1000) / 3.0F;
    const QuantTensor w = testutil::random_tensor(rng, s, wb);
    out.push_back(layer(conv ? LayerKind::Conv : LayerKind::FC, in, o, k, conv ? 2 : 1, conv ? 1 : 0, wb,
                        static_cast<unsigned>(pick(rng)), {w.data().begin(), w.data().end()}, sc, bi));
  }
  return out;
}

}  // namespace

TEST_CASE("weight file round trip") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 30; ++t) {
    const std::vector<Layer> layers = random_layers(rng);
    const auto bytes = serialize_layers(layers);
    std::size_t expected = kWeightPreamble;
    for (const auto& l : layers) expected += kLayerHeaderBytes + layer_payload_bytes(l.spec);
    CHECK(bytes.size() == expected);
    CHECK(parse_layers(bytes) == layers);
  }
}

TEST_CASE("serialization matches the committed golden bytes") {
  const auto golden = read_binary_file(kData / "fixtures" / "tiny_golden.pisaw");
  CHECK(golden.size() == 120);
  CHECK(serialize_layers(tiny_golden_layers()) == golden);
  CHECK(parse_layers(golden) == tiny_golden_layers());
}

TEST_CASE("weight file errors carry byte offsets") {
  const auto good = serialize_layers(tiny_golden_layers());
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    const std::vector<std::uint8_t> part(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
    REQUIRE(format_offset(part) == cut);
  }
  auto bad = good;
  bad[0] = 'X';
  CHECK(format_offset(bad) == 0);
  bad = good;
  bad[7] = 2;
  CHECK(format_offset(bad) == 7);
  bad = good;
  bad[kWeightPreamble + kLayerHeaderBytes] = 9;  // kind of layer 2
  CHECK(format_offset(bad) == kWeightPreamble + kLayerHeaderBytes);
  bad = good;
  bad.push_back(0);
  CHECK(format_offset(bad) == good.size());
  // A header promising four billion layers fails before allocating them.
  bad = good;
  bad[8] = bad[9] = bad[10] = bad[11] = 0xFF;
  CHECK(format_offset(bad) == good.size());
  bad[8] = bad[9] = bad[10] = bad[11] = 0;
  CHECK(format_offset(bad) == 8);
}

TEST_CASE("weight parser is total on corrupted input") {
  std::mt19937_64 rng(5);
  const auto good = serialize_layers(tiny_golden_layers());
  for (int t = 0; t < 3000; ++t) {
    auto b = good;
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) b[rng() % b.size()] = static_cast<std::uint8_t>(rng());
    if ((rng() & 3U) == 0) b.resize(rng() % b.size());
    try {
      parse_layers(b);
    } catch (const Error&) {
    }
  }
  for (int t = 0; t < 500; ++t) {
    std::vector<std::uint8_t> b(rng() % 64);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    CHECK_THROWS_AS(parse_layers(b), FormatError);
  }
}

TEST_CASE("save and load a network") {
  const NetworkSpec net = load_weights(kData / "fixtures" / "mnist_bwnn.pisaw");
  CHECK(net.name == "mnist_bwnn");
  CHECK(net.layers.size() == 3);
  CHECK(net.v() == 256);
  const auto tmp = std::filesystem::temp_directory_path() / "pisa_roundtrip.pisaw";
  save_weights(net, tmp);
  CHECK(read_binary_file(tmp) == read_binary_file(kData / "fixtures" / "mnist_bwnn.pisaw"));
  std::filesystem::remove(tmp);
  CHECK(kind_of([] { load_weights("/nonexistent/net.pisaw"); }) == ErrorKind::IoError);
}

TEST_CASE("PGM images") {
  const std::vector<std::uint8_t> pgm = {'P', '5', '\n', '#', ' ', 'c', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n',
                                         0, 255, 128, 64};
  const ImageSet s = parse_pgm(pgm);
  REQUIRE(s.frames.size() == 1);
  const Frame& f = s.frames[0];
  CHECK(f(0, 0) == 0.0);
  CHECK(f(0, 1) == 1.0);
  CHECK(f(1, 0) == 128.0 / 255.0);
  CHECK(f(1, 1) == 64.0 / 255.0);
  CHECK(encode_pgm(f) == std::vector<std::uint8_t>{'P', '5', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n', 0, 255, 128, 64});
  const std::vector<std::uint8_t> truncated(pgm.begin(), pgm.end() - 1);
  CHECK_THROWS_AS(parse_pgm(truncated), FormatError);
  const std::vector<std::uint8_t> p2 = {'P', '2', '\n'};
  CHECK_THROWS_AS(parse_pgm(p2), FormatError);
}

TEST_CASE("IDX images and labels") {
  const ImageSet mnist = load_images(kData / "mnist" / "t10k-images-idx3-ubyte.gz");
  CHECK(mnist.frames.size() == 10000);
  CHECK(mnist.rows == 28);
  CHECK(mnist.cols == 28);
  CHECK(load_labels(kData / "mnist" / "t10k-labels-idx1-ubyte.gz").size() == 10000);

  std::vector<std::uint8_t> idx = {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 51, 102, 255};
  const ImageSet s = parse_idx_images(idx);
  CHECK(s.frames[0](0, 1) == 51.0 / 255.0);
  CHECK(s.frames[0](1, 1) == 1.0);
  idx[3] = 2;
  try {
    parse_idx_images(idx);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.offset() == 3);
  }
  const std::vector<std::uint8_t> labels = {0, 0, 8, 1, 0, 0, 0, 2, 7, 3};
  CHECK(parse_idx_labels(labels) == std::vector<std::uint8_t>{7, 3});
  const std::vector<std::uint8_t> gz_garbage = {0x1f, 0x8b, 8, 0, 1, 2, 3};
  CHECK_THROWS_AS(maybe_gunzip(gz_garbage), FormatError);
}

TEST_CASE("shipped cost table equals the compiled defaults") {
  CHECK(load_cost_table(kConfig / "costs.toml") == CostTable::defaults());
  CHECK(parse_cost_table(to_toml(CostTable::defaults())) == CostTable::defaults());
}

TEST_CASE("shipped default config equals the compiled defaults") {
  const RunConfig c = load_run_config(kConfig / "default.toml");
  const RunConfig d;
  CHECK(c.sensor.rows == d.sensor.rows);
  CHECK(c.sensor.v == d.sensor.v);
  CHECK(c.sensor.v_dd == d.sensor.v_dd);
  CHECK(c.sensor_config.exposure_gain == d.sensor_config.exposure_gain);
  CHECK(c.pns == d.pns);
  CHECK(c.variation.k_dra == d.variation.k_dra);
  CHECK(c.variation.k_tra == d.variation.k_tra);
  CHECK(c.platform == d.platform);
  CHECK(c.wi == d.wi);
  CHECK(c.cost_table == kConfig / "costs.toml");
  CHECK(resolve_cost_table(c) == CostTable::defaults());
}

TEST_CASE("config validation") {
  CHECK(kind_of([] { parse_run_config("[sensor]\nrowz = 3\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_run_config("[sensors]\nrows = 3\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_run_config("[sensor]\nrows = \"x\"\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_run_config("[sensor]\nrows = 0\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_run_config("[perf]\nplatform = \"tpu\"\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_run_config("[variation]\nsigma_tmr = -1\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_run_config("not toml ["); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_cost_table("[cp_mac]\nenergy = 1\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_cost_table("[cp_mac]\nenergy = 1\nlatency = 0\npower = 2\n"); }) == ErrorKind::ConfigError);
  const RunConfig c = parse_run_config("[perf]\nwi = \"1:16\"\nplatform = \"pisa-pns-i\"\n[variation]\nseed = 9\n");
  CHECK(c.wi == WiConfig{1, 16});
  CHECK(c.platform == Platform::PisaPnsI);
  CHECK(c.variation.seed == 9);
  CHECK(kind_of([] { parse_wi("1-4"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_wi("0:4"); }) == ErrorKind::ConfigError);
}

TEST_CASE("report JSON field names") {
  const TraceReport r = account(build_trace(svhn_workload(4), Platform::PisaPnsII), CostTable::defaults(),
                                Platform::PisaPnsII);
  const nlohmann::json j = to_json(r);
  for (const char* key : {"workload", "platform", "frames", "energy", "latency", "stages", "fps",
                          "efficiency_tops_per_w", "memory_bottleneck_ratio", "resource_utilization"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["energy"].contains("data_transfer"));
  CHECK(j["energy"]["total"] == r.total_energy_j);
  CHECK(j["latency"]["total"] == r.total_latency_s);
  CHECK(j["platform"] == "pisa-pns-ii");
  const nlohmann::json t = to_json(build_trace(svhn_workload(4), Platform::PisaPnsII));
  CHECK(t["layers"].size() == 7);
  CHECK(t["layers"][0].contains("pns"));
}
