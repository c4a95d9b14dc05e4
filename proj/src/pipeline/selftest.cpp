#include "pisa/pipeline/selftest.hpp"

#include <cmath>
#include <random>

#include "pisa/conv/engine.hpp"
#include "pisa/dram/subarray.hpp"
#include "pisa/perf/workload.hpp"
#include "pisa/pipeline/network.hpp"
#include "pisa/pipeline/system.hpp"
#include "pisa/sensor/cfp_array.hpp"

namespace pisa {

namespace {

QuantTensor random_tensor(std::mt19937_64& rng, Shape shape, unsigned bits) {
  std::uniform_int_distribution<std::uint32_t> d(0, static_cast<std::uint32_t>((std::uint64_t{1} << bits) - 1));
  std::vector<std::uint32_t> v(element_count(shape));
  for (auto& x : v) x = d(rng);
  return QuantTensor(std::move(shape), bits, std::move(v));
}

Layer random_layer(std::mt19937_64& rng, LayerSpec s) {
  s.bn_scale.assign(s.out_channels, 0.25F);
  s.bn_bias.assign(s.out_channels, 1.0F);
  Shape ws{s.out_channels, s.in_channels};
  if (s.kind == LayerKind::Conv) {
    ws.push_back(s.kernel_h);
    ws.push_back(s.kernel_w);
  }
  return Layer{s, random_tensor(rng, ws, s.weight_bits)};
}

SelfCheck check_bitwise_dot(std::mt19937_64& rng) {
  for (unsigned m : {1U, 3U, 8U}) {
    for (unsigned n : {1U, 2U}) {
      for (int rep = 0; rep < 20; ++rep) {
        const QuantTensor a = random_tensor(rng, {37}, m);
        const QuantTensor b = random_tensor(rng, {37}, n);
        std::uint64_t direct = 0;
        for (std::size_t i = 0; i < a.size(); ++i) direct += std::uint64_t{a[i]} * b[i];
        if (bitwise_dot(decompose(a), decompose(b)) != direct) return {"bitwise_dot", false, "mismatch"};
      }
    }
  }
  return {"bitwise_dot", true, "120 random pairs"};
}

SelfCheck check_dra() {
  DramSubArray sa;
  const std::size_t x1 = sa.compute_row(0);
  const std::size_t x2 = sa.compute_row(1);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      sa.init_row(x1, a != 0);
      sa.init_row(x2, b != 0);
      const DraOutput o = sa.dra_nand(x1, x2, 0);
      const bool expect_and = a && b;
      if (o.and_.all() != expect_and || o.nand.all() == expect_and) return {"dra_truth_table", false, "mismatch"};
    }
  }
  return {"dra_truth_table", true, "4 combinations x 256 columns"};
}

SelfCheck check_substrates(std::mt19937_64& rng) {
  LayerSpec s;
  s.kind = LayerKind::Conv;
  s.in_channels = 3;
  s.out_channels = 5;
  s.kernel_h = s.kernel_w = 3;
  s.padding = 1;
  s.weight_bits = 2;
  s.input_bits = 3;
  s.activation = Activation::QuantRelu;
  s.output_bits = 4;
  const Layer layer = random_layer(rng, s);
  const QuantTensor x = random_tensor(rng, {3, 6, 6}, 3);
  const LayerResult f = run_layer(x, layer, Substrate::Functional);
  const LayerResult d = run_layer(x, layer, Substrate::PnsDRA);
  const LayerResult t = run_layer(x, layer, Substrate::PnsTRA);
  const bool same = f.raw == d.raw && d.raw == t.raw && f.fmap == d.fmap && d.fmap == t.fmap;
  const bool planned = d.tally == plan_layer(s, x.shape(), Substrate::PnsDRA) &&
                       t.tally == plan_layer(s, x.shape(), Substrate::PnsTRA);
  return {"substrate_equivalence", same && planned, same ? (planned ? "bit-identical, tallies planned" : "tally mismatch") : "output mismatch"};
}

SelfCheck check_sensor(std::mt19937_64& rng) {
  CfpParams p;
  p.rows = p.cols = 8;
  p.v = 4;
  SensorConfig c;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<BinaryWeightPlane> w;
    for (std::size_t j = 0; j < p.v; ++j) {
      BitVector b(p.pixels());
      for (std::size_t i = 0; i < b.size(); ++i) b.set(i, coin(rng));
      w.emplace_back(Shape{p.rows, p.cols}, b);
    }
    Frame f(8, 8);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = u(rng);
    CfpArray arr(p, c);
    const BitVector bits = run_layer1(arr, f, w);
    for (std::size_t j = 0; j < p.v; ++j) {
      double plus = 0.0;
      double minus = 0.0;
      for (std::size_t i = 0; i < p.pixels(); ++i) {
        const double vpd = arr.v_pd().data()[i];
        (w[j].bits().get(i) ? plus : minus) += vpd;
      }
      if (bits.get(j) != (plus > minus)) return {"sensor_sign", false, "mismatch"};
    }
  }
  return {"sensor_sign", true, "50 random 8x8 frames"};
}

SelfCheck check_perf() {
  const Workload w = svhn_workload(4);
  const CostTable c = CostTable::defaults();
  const TraceReport a = account(build_trace(w, Platform::PisaPnsII), c, Platform::PisaPnsII);
  const TraceReport b = account(build_trace(w, Platform::PisaPnsII), c.scaled(3.0), Platform::PisaPnsII);
  const bool ok = std::abs(b.total_energy_j - 3.0 * a.total_energy_j) <= 1e-12 * b.total_energy_j &&
                  std::abs(b.memory_bottleneck_ratio - a.memory_bottleneck_ratio) < 1e-12;
  return {"perf_linearity", ok, ok ? "scale 3" : "not linear"};
}

}  // namespace

std::vector<SelfCheck> run_selftest(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<SelfCheck> out;
  out.push_back(check_bitwise_dot(rng));
  out.push_back(check_dra());
  out.push_back(check_substrates(rng));
  out.push_back(check_sensor(rng));
  out.push_back(check_perf());
  return out;
}

}  // namespace pisa
