#include <random>

#include "doctest.h"
#include "helpers.hpp"

#include "pisa/conv/engine.hpp"

using namespace pisa;
using testutil::kind_of;
using testutil::random_tensor;

namespace {

Layer make_layer(std::mt19937_64& rng, LayerKind kind, std::size_t in, std::size_t out, std::size_t k,
                 std::size_t stride, std::size_t pad, unsigned wb, unsigned ib, Activation act, unsigned ob = 1) {
  Layer l;
  l.spec.kind = kind;
  l.spec.in_channels = in;
  l.spec.out_channels = out;
  l.spec.kernel_h = l.spec.kernel_w = kind == LayerKind::FC ? 1 : k;
  l.spec.stride = stride;
  l.spec.padding = pad;
  l.spec.weight_bits = wb;
  l.spec.input_bits = ib;
  l.spec.activation = act;
  l.spec.output_bits = ob;
  std::uniform_real_distribution<float> scale(-0.5F, 0.5F);
  for (std::size_t o = 0; o < out; ++o) {
    l.spec.bn_scale.push_back(scale(rng));
    l.spec.bn_bias.push_back(scale(rng) * 4.0F);
  }
  const Shape ws = kind == LayerKind::FC ? Shape{out, in} : Shape{out, in, k, k};
  l.weights = random_tensor(rng, ws, wb);
  return l;
}

/// Direct signed convolution over zero-padded input.
std::vector<std::int64_t> direct_conv(const QuantTensor& x, const Layer& l) {
  const LayerSpec& s = l.spec;
  const Shape out = s.output_shape(x.shape());
  std::vector<std::int64_t> r;
  if (s.kind == LayerKind::FC) {
    for (std::size_t o = 0; o < s.out_channels; ++o) {
      std::int64_t acc = 0;
      for (std::size_t i = 0; i < s.in_channels; ++i) acc += l.weight_level(o * s.in_channels + i) * std::int64_t{x[i]};
      r.push_back(acc);
    }
    return r;
  }
  const std::size_t h = x.shape()[1], w = x.shape()[2];
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    for (std::size_t oy = 0; oy < out[1]; ++oy) {
      for (std::size_t ox = 0; ox < out[2]; ++ox) {
        std::int64_t acc = 0;
        for (std::size_t c = 0; c < s.in_channels; ++c) {
          for (std::size_t dy = 0; dy < s.kernel_h; ++dy) {
            for (std::size_t dx = 0; dx < s.kernel_w; ++dx) {
              const long y = static_cast<long>(oy * s.stride + dy) - static_cast<long>(s.padding);
              const long xx = static_cast<long>(ox * s.stride + dx) - static_cast<long>(s.padding);
              if (y < 0 || xx < 0 || y >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
              const std::size_t wi = ((o * s.in_channels + c) * s.kernel_h + dy) * s.kernel_w + dx;
              acc += l.weight_level(wi) * std::int64_t{x[(c * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(xx)]};
            }
          }
        }
        r.push_back(acc);
      }
    }
  }
  return r;
}

void check_all_substrates(const QuantTensor& x, const Layer& l) {
  const auto oracle = direct_conv(x, l);
  const LayerResult f = run_layer(x, l, Substrate::Functional);
  CHECK(f.raw == oracle);
  CHECK(f.tally == plan_layer(l.spec, x.shape(), Substrate::Functional));
  for (Substrate s : {Substrate::PnsDRA, Substrate::PnsTRA}) {
    const LayerResult r = run_layer(x, l, s);
    CHECK(r.raw == oracle);
    CHECK(r.fmap == f.fmap);
    CHECK(r.values == f.values);
    CHECK(r.tally == plan_layer(l.spec, x.shape(), s));
  }
}

}  // namespace

TEST_CASE("bitcount") {
  CHECK(bitcount(BitVector::from_string("0001")) == 1);
  CHECK(bitcount(BitVector(300)) == 0);
  std::mt19937_64 rng(1);
  BitVector b(200);
  std::size_t n = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const bool v = (rng() & 1U) != 0;
    b.set(i, v);
    n += v ? 1 : 0;
  }
  CHECK(bitcount(b) == n);
  DramRow r;
  r.set(3).set(200);
  CHECK(bitcount(r) == 2);
}

TEST_CASE("shift accumulate: 0001 shifted by m+n = 3 adds 1000") {
  CHECK(shift_accumulate(bitcount(BitVector::from_string("0001")), 2, 1, 0) == 0b1000);
  CHECK(shift_accumulate(0, 5, 7, 42) == 42);
  CHECK(shift_accumulate(5, 0, 0, 10) == 15);
  CHECK(kind_of([] { shift_accumulate(1, 40, 30, 0); }) == ErrorKind::InvariantViolation);
}

TEST_CASE("bitwise dot") {
  const auto one = decompose(QuantTensor({1}, 1, {1}));
  CHECK(bitwise_dot(one, one) == 1);

  // 3-bit x 3-bit: sum over (m, n) of 2^(m+n) * bitcount(AND).
  const QuantTensor i({4}, 3, {0, 3, 5, 2});
  const QuantTensor w({4}, 3, {7, 1, 6, 4});
  const auto ip = decompose(i);
  const auto wp = decompose(w);
  std::uint64_t manual = 0;
  for (unsigned m = 0; m < 3; ++m) {
    for (unsigned n = 0; n < 3; ++n) manual += bitcount(ip.plane(m) & wp.plane(n)) << (m + n);
  }
  CHECK(bitwise_dot(ip, wp) == manual);
  CHECK(manual == 0 * 7 + 3 * 1 + 5 * 6 + 2 * 4);

  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const QuantTensor a = random_tensor(rng, {16}, 3);
    const QuantTensor b = random_tensor(rng, {16}, 3);
    std::uint64_t d = 0;
    for (std::size_t k = 0; k < 16; ++k) d += std::uint64_t{a[k]} * b[k];
    REQUIRE(bitwise_dot(decompose(a), decompose(b)) == d);
  }
  CHECK(kind_of([&] { bitwise_dot(decompose(QuantTensor({3}, 1)), decompose(QuantTensor({4}, 1))); }) ==
        ErrorKind::ShapeMismatch);
}

TEST_CASE("bitwise dot exactness across precisions") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> len(1, 600);
  for (unsigned m : {1U, 2U, 3U, 4U, 8U}) {
    for (unsigned n : {1U, 2U}) {
      for (int t = 0; t < 100; ++t) {
        const std::size_t k = len(rng);
        const QuantTensor a = random_tensor(rng, {k}, m);
        const QuantTensor b = random_tensor(rng, {k}, n);
        std::uint64_t d = 0;
        for (std::size_t i = 0; i < k; ++i) d += std::uint64_t{a[i]} * b[i];
        REQUIRE(bitwise_dot(decompose(a), decompose(b)) == d);
      }
    }
  }
}

TEST_CASE("weight levels") {
  Layer l;
  l.spec.weight_bits = 2;
  l.spec.bn_scale = {1};
  l.spec.bn_bias = {0};
  l.spec.in_channels = 4;
  l.weights = QuantTensor({1, 4}, 2, {0, 1, 2, 3});
  CHECK(l.weight_level(0) == -3);
  CHECK(l.weight_level(1) == -1);
  CHECK(l.weight_level(2) == 1);
  CHECK(l.weight_level(3) == 3);
}

TEST_CASE("FC layer equals a matrix-vector product") {
  std::mt19937_64 rng(2);
  const Layer l = make_layer(rng, LayerKind::FC, 40, 12, 1, 1, 0, 1, 4, Activation::QuantRelu, 3);
  check_all_substrates(random_tensor(rng, {40}, 4), l);
}

TEST_CASE("balanced kernel on uniform input leaves only the bias") {
  std::mt19937_64 rng(2);
  Layer l = make_layer(rng, LayerKind::FC, 8, 2, 1, 1, 0, 1, 2, Activation::Linear);
  l.weights = QuantTensor({2, 8}, 1, {0, 1, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0});
  const LayerResult r = run_layer(QuantTensor({8}, 2, std::vector<std::uint32_t>(8, 3)), l, Substrate::PnsDRA);
  CHECK(r.raw == std::vector<std::int64_t>{0, 0});
  CHECK(r.values(0) == static_cast<double>(l.spec.bn_bias[0]));
  CHECK(r.values(1) == static_cast<double>(l.spec.bn_bias[1]));
  CHECK(r.fmap.size() == 0);
}

TEST_CASE("3x3 conv on 8x8 at W:I = 1:4 equals direct convolution") {
  std::mt19937_64 rng(4);
  const Layer l = make_layer(rng, LayerKind::Conv, 1, 4, 3, 1, 1, 1, 4, Activation::Sign);
  check_all_substrates(random_tensor(rng, {1, 8, 8}, 4), l);
}

TEST_CASE("conv exactness over precisions, strides and padding") {
  std::mt19937_64 rng(6);
  for (unsigned m : {1U, 2U, 3U, 8U}) {
    for (unsigned n : {1U, 2U, 3U}) {
      for (std::size_t stride : {1U, 2U}) {
        const Layer l = make_layer(rng, LayerKind::Conv, 3, 5, 3, stride, stride - 1, n, m, Activation::QuantRelu, 2);
        check_all_substrates(random_tensor(rng, {3, 7, 6}, m), l);
      }
    }
  }
}

TEST_CASE("windows spanning several rows and multiple channel groups") {
  std::mt19937_64 rng(8);
  // K = 288 > 256 columns; 130 channels of 2-bit weights need two groups.
  const Layer l = make_layer(rng, LayerKind::Conv, 32, 130, 3, 1, 1, 2, 1, Activation::Sign);
  const QuantTensor x = random_tensor(rng, {32, 4, 4}, 1);
  const LayerMapping map = map_layer(l.spec, x.shape());
  CHECK(map.windows_per_row == 0);
  CHECK(map.segments == 2);
  CHECK(map.chunks == 32);
  CHECK(map.groups == 2);
  check_all_substrates(x, l);

  // A packed FC mapping split into three groups.
  const Layer fc = make_layer(rng, LayerKind::FC, 64, 600, 1, 1, 0, 1, 2, Activation::Sign);
  CHECK(map_layer(fc.spec, {64}).groups == 2);
  CHECK(map_layer(fc.spec, {64}, 250).groups == 3);
  check_all_substrates(random_tensor(rng, {64}, 2), fc);
}

TEST_CASE("closed-form tally") {
  LayerSpec s;
  s.kind = LayerKind::Conv;
  s.in_channels = 4;
  s.out_channels = 64;
  s.kernel_h = s.kernel_w = 3;
  s.padding = 1;
  s.input_bits = 4;
  s.bn_scale.assign(64, 1.0F);
  s.bn_bias.assign(64, 0.0F);
  const LayerTally t = plan_layer(s, {4, 8, 8}, Substrate::PnsDRA);
  // K = 36: 7 windows per row, 64 positions -> 10 chunks.
  CHECK(t.chunks == 10);
  CHECK(t.ands == 4 * 1 * 64 * 10);
  CHECK(t.row_pairs == 640);
  CHECK(t.row_writes == 64 + 1 * 4 * 10);
  CHECK(t.row_reads == t.ands + 40);
  CHECK(t.shift_adds == 4 * 64 * 64 + 4 * 64);
  CHECK(t.row_copies == 2 * t.ands);
  CHECK(t.dra_cycles == t.ands);
  CHECK(t.macs == 36 * 64 * 64);
  const LayerTally tra = plan_layer(s, {4, 8, 8}, Substrate::PnsTRA);
  CHECK(tra.tra_steps == 4 * t.ands);
  CHECK(tra.row_copies == 0);
}

TEST_CASE("layer contract errors") {
  std::mt19937_64 rng(1);
  const Layer l = make_layer(rng, LayerKind::Conv, 2, 3, 3, 1, 0, 1, 2, Activation::Sign);
  CHECK(kind_of([&] { run_layer(random_tensor(rng, {2, 5, 5}, 3), l, Substrate::Functional); }) ==
        ErrorKind::ShapeMismatch);
  CHECK(kind_of([&] { run_layer(random_tensor(rng, {3, 5, 5}, 2), l, Substrate::Functional); }) ==
        ErrorKind::ShapeMismatch);
  CHECK(kind_of([&] { run_layer(random_tensor(rng, {2, 2, 2}, 2), l, Substrate::Functional); }) ==
        ErrorKind::ShapeMismatch);
  Layer wide = make_layer(rng, LayerKind::FC, 8, 2, 1, 1, 0, 12, 8, Activation::Sign);
  CHECK(kind_of([&] { map_layer(wide.spec, {8}, 20); }) == ErrorKind::CapacityExceeded);
  Layer bad = l;
  bad.spec.bn_bias.pop_back();
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("activations") {
  LayerSpec s;
  s.activation = Activation::QuantRelu;
  s.output_bits = 2;
  CHECK(activate(s, -1.0) == 0);
  CHECK(activate(s, 1.49) == 1);
  CHECK(activate(s, 1.5) == 2);
  CHECK(activate(s, 9.0) == 3);
  s.activation = Activation::Sign;
  CHECK(activate(s, 0.0) == 0);
  CHECK(activate(s, 1e-9) == 1);
}
