#include "pisa/io/weight_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "pisa/error.hpp"

namespace pisa {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v & 0xFFU));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::size_t pos() const noexcept { return pos_; }
  void need(std::size_t n, const char* what) const {
    if (b_.size() - pos_ < n) raise_at(b_.size(), std::string("truncated ") + what);
  }
  std::uint8_t u8() {
    need(1, "field");
    return b_[pos_++];
  }
  std::uint16_t u16() {
    need(2, "field");
    const auto v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4, "field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n, "payload");
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  [[noreturn]] static void raise_at(std::size_t offset, const std::string& what) { throw FormatError(offset, what); }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::size_t weight_count(const LayerSpec& s) { return s.out_channels * s.in_channels * s.kernel_h * s.kernel_w; }

Shape weight_shape(const LayerSpec& s) {
  if (s.kind == LayerKind::FC) return {s.out_channels, s.in_channels};
  return {s.out_channels, s.in_channels, s.kernel_h, s.kernel_w};
}

}  // namespace

std::size_t layer_payload_bytes(const LayerSpec& spec) {
  return spec.weight_bits * ((weight_count(spec) + 7) / 8) + 8 * spec.out_channels;
}

std::vector<std::uint8_t> serialize_layers(std::span<const Layer> layers) {
  Writer w;
  for (char c : kWeightMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(kWeightVersion);
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (const Layer& l : layers) {
    l.validate();
    const LayerSpec& s = l.spec;
    if (s.in_channels > 0xFFFF || s.out_channels > 0xFFFF || s.kernel_h > 0xFF || s.kernel_w > 0xFF ||
        s.stride > 0xFF || s.padding > 0xFF) {
      raise(ErrorKind::InvalidCount, "layer dimensions exceed the file format's field widths");
    }
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u16(static_cast<std::uint16_t>(s.in_channels));
    w.u16(static_cast<std::uint16_t>(s.out_channels));
    w.u8(static_cast<std::uint8_t>(s.kernel_h));
    w.u8(static_cast<std::uint8_t>(s.kernel_w));
    w.u8(static_cast<std::uint8_t>(s.stride));
    w.u8(static_cast<std::uint8_t>(s.padding));
    w.u8(static_cast<std::uint8_t>(s.weight_bits));
    w.u8(static_cast<std::uint8_t>(s.input_bits));
  }
  for (const Layer& l : layers) {
    const std::size_t count = weight_count(l.spec);
    for (unsigned n = 0; n < l.spec.weight_bits; ++n) {
      std::uint8_t byte = 0;
      for (std::size_t i = 0; i < count; ++i) {
        if ((l.weights[i] >> n) & 1U) byte = static_cast<std::uint8_t>(byte | (1U << (i % 8)));
        if (i % 8 == 7 || i + 1 == count) {
          w.u8(byte);
          byte = 0;
        }
      }
    }
    for (float f : l.spec.bn_scale) w.f32(f);
    for (float f : l.spec.bn_bias) w.f32(f);
  }
  return w.take();
}

std::vector<Layer> parse_layers(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(sizeof kWeightMagic, "magic");
  if (std::memcmp(bytes.data(), kWeightMagic, sizeof kWeightMagic) != 0) Reader::raise_at(0, "bad magic");
  (void)r.bytes(sizeof kWeightMagic);
  const std::size_t version_at = r.pos();
  if (r.u8() != kWeightVersion) Reader::raise_at(version_at, "unsupported version");
  const std::uint32_t count = r.u32();
  if (count == 0) Reader::raise_at(8, "file declares no layers");
  r.need(static_cast<std::size_t>(count) * kLayerHeaderBytes, "layer headers");

  std::vector<LayerSpec> specs;
  specs.reserve(count);
  std::size_t payload = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.pos();
    LayerSpec s;
    const std::uint8_t kind = r.u8();
    if (kind > 1) Reader::raise_at(at, "unknown layer kind " + std::to_string(kind));
    s.kind = static_cast<LayerKind>(kind);
    s.in_channels = r.u16();
    s.out_channels = r.u16();
    s.kernel_h = r.u8();
    s.kernel_w = r.u8();
    s.stride = r.u8();
    s.padding = r.u8();
    s.weight_bits = r.u8();
    s.input_bits = r.u8();
    s.bn_scale.assign(s.out_channels, 1.0F);
    s.bn_bias.assign(s.out_channels, 0.0F);
    try {
      s.validate();
    } catch (const Error& e) {
      Reader::raise_at(at, std::string("invalid layer header: ") + e.what());
    }
    payload += layer_payload_bytes(s);
    specs.push_back(std::move(s));
  }
  r.need(payload, "layer payload");
  if (bytes.size() - r.pos() != payload) Reader::raise_at(r.pos() + payload, "trailing bytes after last layer");

  std::vector<Layer> layers;
  layers.reserve(count);
  for (LayerSpec& s : specs) {
    const std::size_t n = weight_count(s);
    std::vector<std::uint32_t> codes(n, 0);
    for (unsigned plane = 0; plane < s.weight_bits; ++plane) {
      const auto packed = r.bytes((n + 7) / 8);
      for (std::size_t i = 0; i < n; ++i) {
        if ((packed[i / 8] >> (i % 8)) & 1U) codes[i] |= 1U << plane;
      }
    }
    for (auto& f : s.bn_scale) f = r.f32();
    for (auto& f : s.bn_bias) f = r.f32();
    Layer l;
    l.weights = QuantTensor(weight_shape(s), s.weight_bits, std::move(codes));
    l.spec = std::move(s);
    layers.push_back(std::move(l));
  }
  return layers;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_binary_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::IoError, "short write to " + path.string());
}

NetworkSpec load_weights(const std::filesystem::path& path) {
  return make_network(parse_layers(read_binary_file(path)), 0, 0, path.stem().string());
}

void save_weights(const NetworkSpec& net, const std::filesystem::path& path) {
  write_binary_file(path, serialize_layers(net.layers));
}

}  // namespace pisa
