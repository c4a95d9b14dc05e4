#include "pisa/conv/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "pisa/error.hpp"

namespace pisa {

const char* to_string(LayerKind k) noexcept { return k == LayerKind::Conv ? "conv" : "fc"; }

const char* to_string(Activation a) noexcept {
  switch (a) {
    case Activation::Sign: return "sign";
    case Activation::QuantRelu: return "quant_relu";
    case Activation::Linear: return "linear";
  }
  return "?";
}

const char* to_string(Substrate s) noexcept {
  switch (s) {
    case Substrate::Functional: return "functional";
    case Substrate::PnsDRA: return "pns-dra";
    case Substrate::PnsTRA: return "pns-tra";
  }
  return "?";
}

void LayerSpec::validate() const {
  auto fail = [](const std::string& what) { raise(ErrorKind::InvalidCount, what); };
  if (in_channels == 0 || out_channels == 0) fail("layer channel counts must be positive");
  if (kernel_h == 0 || kernel_w == 0 || stride == 0) fail("kernel and stride must be positive");
  if (weight_bits < 1 || weight_bits > 16) fail("weight_bits must be in [1, 16]");
  if (input_bits < 1 || input_bits > kMaxBits) fail("input_bits must be in [1, 32]");
  if (output_bits < 1 || output_bits > kMaxBits) fail("output_bits must be in [1, 32]");
  if (kind == LayerKind::FC && (kernel_h != 1 || kernel_w != 1 || stride != 1 || padding != 0)) {
    fail("FC layers use a 1x1 kernel, stride 1 and no padding");
  }
  if (bn_scale.size() != out_channels || bn_bias.size() != out_channels) {
    raise(ErrorKind::ShapeMismatch, "batch-norm vectors need one entry per output channel");
  }
}

Shape LayerSpec::output_shape(const Shape& input) const {
  if (kind == LayerKind::FC) {
    if (element_count(input) != in_channels) {
      raise(ErrorKind::ShapeMismatch, "FC layer expects " + std::to_string(in_channels) + " inputs, got " +
                                          to_string(input));
    }
    return {out_channels};
  }
  if (input.size() != 3 || input[0] != in_channels) {
    raise(ErrorKind::ShapeMismatch, "conv layer expects [" + std::to_string(in_channels) + "xHxW], got " +
                                        to_string(input));
  }
  const std::size_t h = input[1] + 2 * padding;
  const std::size_t w = input[2] + 2 * padding;
  if (h < kernel_h || w < kernel_w) raise(ErrorKind::ShapeMismatch, "kernel larger than padded input");
  return {out_channels, (h - kernel_h) / stride + 1, (w - kernel_w) / stride + 1};
}

std::size_t LayerSpec::output_positions(const Shape& input) const {
  const Shape out = output_shape(input);
  return kind == LayerKind::FC ? 1 : out[1] * out[2];
}

void Layer::validate() const {
  spec.validate();
  Shape expected{spec.out_channels, spec.in_channels};
  if (spec.kind == LayerKind::Conv) {
    expected.push_back(spec.kernel_h);
    expected.push_back(spec.kernel_w);
  }
  if (weights.shape() != expected) {
    raise(ErrorKind::ShapeMismatch, "weights have shape " + to_string(weights.shape()) + ", layer needs " +
                                        to_string(expected));
  }
  if (weights.bits() != spec.weight_bits) raise(ErrorKind::ShapeMismatch, "weight code width differs from weight_bits");
}

int Layer::weight_level(std::size_t i) const noexcept {
  return 2 * static_cast<int>(weights[i]) - static_cast<int>((1U << spec.weight_bits) - 1U);
}

LayerTally& LayerTally::operator+=(const LayerTally& o) noexcept {
  ands += o.ands;
  row_pairs += o.row_pairs;
  row_writes += o.row_writes;
  row_reads += o.row_reads;
  bitcount_rows += o.bitcount_rows;
  shift_adds += o.shift_adds;
  row_copies += o.row_copies;
  dra_cycles += o.dra_cycles;
  tra_steps += o.tra_steps;
  groups += o.groups;
  chunks += o.chunks;
  macs += o.macs;
  return *this;
}

std::uint64_t bitcount(const BitVector& row) noexcept { return row.popcount(); }
std::uint64_t bitcount(const DramRow& row) noexcept { return row.count(); }

std::uint64_t shift_accumulate(std::uint64_t count, unsigned m, unsigned n, std::uint64_t acc) {
  const unsigned shift = m + n;
  if (count != 0 && (shift >= 64 || std::countl_zero(count) < static_cast<int>(shift))) {
    raise(ErrorKind::InvariantViolation, "DPU accumulator overflow");
  }
  const std::uint64_t term = count << shift;
  if (acc > UINT64_MAX - term) raise(ErrorKind::InvariantViolation, "DPU accumulator overflow");
  return acc + term;
}

namespace {

std::uint64_t and_popcount(const BitVector& a, const BitVector& b) noexcept {
  const auto wa = a.words();
  const auto wb = b.words();
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) n += static_cast<std::uint64_t>(std::popcount(wa[i] & wb[i]));
  return n;
}

std::uint64_t range_count(const DramRow& row, std::size_t begin, std::size_t len) {
  if (len == kSubArrayCols) return row.count();
  const DramRow mask = ((DramRow{}.set() >> (kSubArrayCols - len)) << begin);
  return (row & mask).count();
}

void check_input(const QuantTensor& input, const LayerSpec& spec) {
  if (input.bits() != spec.input_bits) {
    raise(ErrorKind::ShapeMismatch, "input fmap has " + std::to_string(input.bits()) + " bits, layer expects " +
                                        std::to_string(spec.input_bits));
  }
}

/// Bit planes of every weight kernel: result[o][n] has K bits.
std::vector<std::vector<BitVector>> weight_planes(const Layer& layer) {
  const std::size_t k = layer.spec.kernel_size();
  const unsigned nb = layer.spec.weight_bits;
  std::vector<std::vector<BitVector>> out(layer.spec.out_channels, std::vector<BitVector>(nb, BitVector(k)));
  for (std::size_t o = 0; o < layer.spec.out_channels; ++o) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::uint32_t code = layer.weights[o * k + i];
      for (unsigned n = 0; n < nb; ++n) {
        if ((code >> n) & 1U) out[o][n].set(i, true);
      }
    }
  }
  return out;
}

std::int64_t signed_value(std::uint64_t p, std::uint64_t s, unsigned weight_bits) {
  const auto max_code = static_cast<std::int64_t>((1U << weight_bits) - 1U);
  return 2 * static_cast<std::int64_t>(p) - max_code * static_cast<std::int64_t>(s);
}

void finish(LayerResult& r, const LayerSpec& spec, const Shape& out_shape, std::size_t positions) {
  const std::size_t total = spec.out_channels * positions;
  r.values.resize(static_cast<Eigen::Index>(total));
  std::vector<std::uint32_t> codes(total);
  for (std::size_t o = 0; o < spec.out_channels; ++o) {
    for (std::size_t p = 0; p < positions; ++p) {
      const std::size_t i = o * positions + p;
      const double y = batch_norm(spec, o, r.raw[i]);
      r.values(static_cast<Eigen::Index>(i)) = y;
      codes[i] = activate(spec, y);
    }
  }
  if (spec.activation == Activation::Linear) return;
  const unsigned bits = spec.activation == Activation::Sign ? 1 : spec.output_bits;
  r.fmap = QuantTensor(out_shape, bits, std::move(codes));
}

LayerResult run_functional(const QuantTensor& input, const Layer& layer) {
  const LayerSpec& spec = layer.spec;
  const Shape out_shape = spec.output_shape(input.shape());
  const std::size_t positions = spec.output_positions(input.shape());
  const std::size_t k = spec.kernel_size();
  const auto wp = weight_planes(layer);

  LayerResult r;
  r.raw.assign(spec.out_channels * positions, 0);
  for (std::size_t p = 0; p < positions; ++p) {
    const std::vector<std::uint32_t> window = extract_window(input, spec, p);
    std::uint64_t s = 0;
    for (std::uint32_t x : window) s += x;
    const BitPlaneTensor ip = decompose(QuantTensor({k}, spec.input_bits, window));
    for (std::size_t o = 0; o < spec.out_channels; ++o) {
      std::uint64_t acc = 0;
      for (unsigned m = 0; m < spec.input_bits; ++m) {
        for (unsigned n = 0; n < spec.weight_bits; ++n) {
          acc = shift_accumulate(and_popcount(wp[o][n], ip.plane(m)), m, n, acc);
        }
      }
      r.raw[o * positions + p] = signed_value(acc, s, spec.weight_bits);
    }
  }
  r.tally.macs = static_cast<std::uint64_t>(k) * spec.out_channels * positions;
  finish(r, spec, out_shape, positions);
  return r;
}

LayerResult run_pns(const QuantTensor& input, const Layer& layer, AndMechanism mech) {
  const LayerSpec& spec = layer.spec;
  const Shape out_shape = spec.output_shape(input.shape());
  const LayerMapping map = map_layer(spec, input.shape());
  const std::size_t k = map.kernel;
  const std::size_t positions = map.positions;
  const unsigned mb = spec.input_bits;
  const unsigned nb = spec.weight_bits;
  const std::size_t wr = map.weight_rows;
  const bool packed = map.windows_per_row != 0;
  const auto wp = weight_planes(layer);

  // Windows materialized once; row images per chunk are built from them.
  std::vector<std::vector<std::uint32_t>> windows(positions);
  for (std::size_t p = 0; p < positions; ++p) windows[p] = extract_window(input, spec, p);

  // Column span [begin, begin + len) of kernel element range for a chunk.
  auto chunk_slots = [&](std::size_t c) {
    struct Slot {
      std::size_t position, k_begin, k_len, col;
    };
    std::vector<Slot> slots;
    if (packed) {
      for (std::size_t s = 0; s < map.windows_per_row; ++s) {
        const std::size_t p = c * map.windows_per_row + s;
        if (p < positions) slots.push_back({p, 0, k, s * k});
      }
    } else {
      const std::size_t p = c / map.segments;
      const std::size_t seg = c % map.segments;
      const std::size_t begin = seg * kSubArrayCols;
      slots.push_back({p, begin, std::min(kSubArrayCols, k - begin), 0});
    }
    return slots;
  };

  DramSubArray sa;
  const std::size_t input_base = sa.data_rows() - 1 - mb;
  std::vector<std::uint64_t> sums(positions, 0);
  std::vector<std::uint64_t> acc(spec.out_channels * positions, 0);
  LayerTally t;

  for (std::size_t g = 0; g < map.groups; ++g) {
    const std::size_t o_begin = g * map.channels_per_group;
    const std::size_t o_end = std::min(spec.out_channels, o_begin + map.channels_per_group);
    auto weight_row = [&](std::size_t o, unsigned n, std::size_t seg) { return ((o - o_begin) * nb + n) * wr + seg; };

    for (std::size_t o = o_begin; o < o_end; ++o) {
      for (unsigned n = 0; n < nb; ++n) {
        for (std::size_t seg = 0; seg < wr; ++seg) {
          DramRow row;
          if (packed) {
            for (std::size_t s = 0; s < map.windows_per_row; ++s) {
              for (std::size_t i = 0; i < k; ++i) row[s * k + i] = wp[o][n].get(i);
            }
          } else {
            const std::size_t begin = seg * kSubArrayCols;
            const std::size_t len = std::min(kSubArrayCols, k - begin);
            for (std::size_t i = 0; i < len; ++i) row[i] = wp[o][n].get(begin + i);
          }
          sa.write_row(weight_row(o, n, seg), row);
        }
      }
    }

    // Per (channel, m, n) partial counts of a segmented window.
    std::vector<std::uint64_t> partial((o_end - o_begin) * mb * nb, 0);

    for (std::size_t c = 0; c < map.chunks; ++c) {
      const auto slots = chunk_slots(c);
      const std::size_t seg = packed ? 0 : c % map.segments;
      for (unsigned m = 0; m < mb; ++m) {
        DramRow row;
        for (const auto& sl : slots) {
          const auto& win = windows[sl.position];
          for (std::size_t i = 0; i < sl.k_len; ++i) row[sl.col + i] = (win[sl.k_begin + i] >> m) & 1U;
        }
        sa.write_row(input_base + m, row);
      }
      if (g == 0) {
        for (unsigned m = 0; m < mb; ++m) {
          const DramRow row = sa.read_row(input_base + m);
          for (const auto& sl : slots) sums[sl.position] += range_count(row, sl.col, sl.k_len) << m;
          ++t.bitcount_rows;
        }
      }

      std::vector<std::size_t> a_rows;
      std::vector<std::size_t> b_rows;
      for (std::size_t o = o_begin; o < o_end; ++o) {
        for (unsigned m = 0; m < mb; ++m) {
          for (unsigned n = 0; n < nb; ++n) {
            a_rows.push_back(weight_row(o, n, seg));
            b_rows.push_back(input_base + m);
          }
        }
      }
      const BulkAndResult res = sa.bulk_and(a_rows, b_rows, mech);
      t.bitcount_rows += res.rows.size();

      std::size_t idx = 0;
      for (std::size_t o = o_begin; o < o_end; ++o) {
        for (unsigned m = 0; m < mb; ++m) {
          for (unsigned n = 0; n < nb; ++n, ++idx) {
            const DramRow& row = res.rows[idx];
            if (packed) {
              for (const auto& sl : slots) {
                std::uint64_t& a = acc[o * positions + sl.position];
                a = shift_accumulate(range_count(row, sl.col, sl.k_len), m, n, a);
                ++t.shift_adds;
              }
            } else {
              std::uint64_t& part = partial[((o - o_begin) * mb + m) * nb + n];
              part += row.count();
              if (seg + 1 == map.segments) {
                std::uint64_t& a = acc[o * positions + slots.front().position];
                a = shift_accumulate(part, m, n, a);
                part = 0;
                ++t.shift_adds;
              }
            }
          }
        }
      }
    }
  }
  // S = sum_m 2^m * bitcount(C_m(I)) per window.
  t.shift_adds += static_cast<std::uint64_t>(mb) * positions;

  const DramCounters& cnt = sa.counters();
  t.ands = cnt.dra_cycles + cnt.tra_steps / sa.timing().tra_steps;
  t.row_pairs = static_cast<std::uint64_t>(spec.out_channels) * map.chunks;
  t.row_writes = cnt.row_writes;
  t.row_reads = cnt.row_reads;
  t.row_copies = cnt.row_copies;
  t.dra_cycles = cnt.dra_cycles;
  t.tra_steps = cnt.tra_steps;
  t.groups = map.groups;
  t.chunks = map.chunks;
  t.macs = static_cast<std::uint64_t>(k) * spec.out_channels * positions;

  LayerResult r;
  r.raw.resize(acc.size());
  for (std::size_t o = 0; o < spec.out_channels; ++o) {
    for (std::size_t p = 0; p < positions; ++p) {
      r.raw[o * positions + p] = signed_value(acc[o * positions + p], sums[p], nb);
    }
  }
  r.tally = t;
  finish(r, spec, out_shape, positions);
  return r;
}

}  // namespace

std::uint64_t bitwise_dot(const BitPlaneTensor& input, const BitPlaneTensor& kernel) {
  if (input.size() != kernel.size()) {
    raise(ErrorKind::ShapeMismatch, "window has " + std::to_string(input.size()) + " elements, kernel " +
                                        std::to_string(kernel.size()));
  }
  std::uint64_t acc = 0;
  for (unsigned m = 0; m < input.bits(); ++m) {
    for (unsigned n = 0; n < kernel.bits(); ++n) {
      acc = shift_accumulate(and_popcount(kernel.plane(n), input.plane(m)), m, n, acc);
    }
  }
  return acc;
}

std::vector<std::uint32_t> extract_window(const QuantTensor& input, const LayerSpec& spec, std::size_t position) {
  const std::size_t k = spec.kernel_size();
  std::vector<std::uint32_t> win(k, 0);
  if (spec.kind == LayerKind::FC) {
    const auto d = input.data();
    std::copy(d.begin(), d.end(), win.begin());
    return win;
  }
  const Shape out = spec.output_shape(input.shape());
  const std::size_t h = input.shape()[1];
  const std::size_t w = input.shape()[2];
  const std::size_t oy = position / out[2];
  const std::size_t ox = position % out[2];
  for (std::size_t c = 0; c < spec.in_channels; ++c) {
    for (std::size_t dy = 0; dy < spec.kernel_h; ++dy) {
      const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * spec.stride + dy) -
                               static_cast<std::ptrdiff_t>(spec.padding);
      if (y < 0 || y >= static_cast<std::ptrdiff_t>(h)) continue;
      for (std::size_t dx = 0; dx < spec.kernel_w; ++dx) {
        const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(ox * spec.stride + dx) -
                                 static_cast<std::ptrdiff_t>(spec.padding);
        if (x < 0 || x >= static_cast<std::ptrdiff_t>(w)) continue;
        win[(c * spec.kernel_h + dy) * spec.kernel_w + dx] =
            input[(c * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
      }
    }
  }
  return win;
}

LayerMapping map_layer(const LayerSpec& spec, const Shape& input, std::size_t data_rows) {
  LayerMapping m;
  m.kernel = spec.kernel_size();
  m.positions = spec.output_positions(input);
  if (m.kernel <= kSubArrayCols) {
    m.windows_per_row = kSubArrayCols / m.kernel;
    m.segments = 1;
    m.chunks = (m.positions + m.windows_per_row - 1) / m.windows_per_row;
    m.weight_rows = 1;
  } else {
    m.windows_per_row = 0;
    m.segments = (m.kernel + kSubArrayCols - 1) / kSubArrayCols;
    m.chunks = m.positions * m.segments;
    m.weight_rows = m.segments;
  }
  const std::size_t reserved = static_cast<std::size_t>(spec.input_bits) + 1;
  const std::size_t per_channel = spec.weight_bits * m.weight_rows;
  if (data_rows <= reserved || per_channel > data_rows - reserved) {
    raise(ErrorKind::CapacityExceeded, "one output channel needs " + std::to_string(per_channel) +
                                           " weight rows plus " + std::to_string(reserved) +
                                           " input/result rows, sub-array has " + std::to_string(data_rows));
  }
  m.channels_per_group = (data_rows - reserved) / per_channel;
  m.groups = (spec.out_channels + m.channels_per_group - 1) / m.channels_per_group;
  return m;
}

LayerTally plan_layer(const LayerSpec& spec, const Shape& input, Substrate substrate, std::size_t data_rows) {
  LayerTally t;
  const std::uint64_t k = spec.kernel_size();
  const std::uint64_t o = spec.out_channels;
  const std::uint64_t mb = spec.input_bits;
  const std::uint64_t nb = spec.weight_bits;
  if (substrate == Substrate::Functional) {
    t.macs = k * o * spec.output_positions(input);
    return t;
  }
  const LayerMapping m = map_layer(spec, input, data_rows);
  const std::uint64_t c = m.chunks;
  const std::uint64_t p = m.positions;
  t.ands = mb * nb * o * c;
  t.row_pairs = o * c;
  t.row_writes = nb * o * m.weight_rows + m.groups * mb * c;
  t.row_reads = t.ands + mb * c;
  t.bitcount_rows = t.row_reads;
  t.shift_adds = mb * nb * o * p + mb * p;
  if (substrate == Substrate::PnsDRA) {
    t.row_copies = 2 * t.ands;
    t.dra_cycles = t.ands;
  } else {
    t.tra_steps = DramTiming{}.tra_steps * t.ands;
  }
  t.groups = m.groups;
  t.chunks = c;
  t.macs = k * o * p;
  return t;
}

double batch_norm(const LayerSpec& spec, std::size_t channel, std::int64_t val) noexcept {
  return static_cast<double>(spec.bn_scale[channel]) * static_cast<double>(val) +
         static_cast<double>(spec.bn_bias[channel]);
}

std::uint32_t activate(const LayerSpec& spec, double y) noexcept {
  switch (spec.activation) {
    case Activation::Sign:
      return y > 0.0 ? 1U : 0U;
    case Activation::QuantRelu: {
      const double top = static_cast<double>((std::uint64_t{1} << spec.output_bits) - 1);
      return static_cast<std::uint32_t>(std::clamp(std::floor(y + 0.5), 0.0, top));
    }
    case Activation::Linear:
      return 0;
  }
  return 0;
}

LayerResult run_layer(const QuantTensor& input, const Layer& layer, Substrate substrate) {
  layer.validate();
  check_input(input, layer.spec);
  switch (substrate) {
    case Substrate::Functional: return run_functional(input, layer);
    case Substrate::PnsDRA: return run_pns(input, layer, AndMechanism::DRA);
    case Substrate::PnsTRA: return run_pns(input, layer, AndMechanism::TRA);
  }
  raise(ErrorKind::InvariantViolation, "unknown substrate");
}

}  // namespace pisa
