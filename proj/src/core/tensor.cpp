#include "pisa/core/tensor.hpp"

#include <functional>
#include <numeric>

#include "pisa/error.hpp"

namespace pisa {

std::size_t element_count(const Shape& shape) noexcept {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_bits(unsigned bits) {
  if (bits < 1 || bits > kMaxBits) {
    raise(ErrorKind::InvalidCount, "bit width must be in [1, 32], got " + std::to_string(bits));
  }
}

}  // namespace

QuantTensor::QuantTensor(Shape shape, unsigned bits)
    : shape_(std::move(shape)), bits_(bits), data_(element_count(shape_), 0) {
  check_bits(bits);
}

QuantTensor::QuantTensor(Shape shape, unsigned bits, std::vector<std::uint32_t> data)
    : shape_(std::move(shape)), bits_(bits), data_(std::move(data)) {
  check_bits(bits);
  if (data_.size() != element_count(shape_)) {
    raise(ErrorKind::ShapeMismatch, "tensor of shape " + to_string(shape_) + " needs " +
                                        std::to_string(element_count(shape_)) + " elements, got " +
                                        std::to_string(data_.size()));
  }
  const std::uint64_t limit = std::uint64_t{1} << bits_;
  for (std::uint32_t v : data_) {
    if (v >= limit) {
      raise(ErrorKind::InvalidCount,
            "element " + std::to_string(v) + " does not fit in " + std::to_string(bits_) + " bits");
    }
  }
}

std::uint32_t QuantTensor::max_value() const noexcept {
  return static_cast<std::uint32_t>((std::uint64_t{1} << bits_) - 1);
}

QuantTensor QuantTensor::reshaped(Shape shape) const {
  return QuantTensor(std::move(shape), bits_, data_);
}

BitPlaneTensor::BitPlaneTensor(Shape shape, std::vector<BitVector> planes)
    : shape_(std::move(shape)), planes_(std::move(planes)) {
  if (planes_.empty() || planes_.size() > kMaxBits) {
    raise(ErrorKind::InvalidCount, "plane count must be in [1, 32]");
  }
  const std::size_t n = element_count(shape_);
  for (const auto& p : planes_) {
    if (p.size() != n) raise(ErrorKind::ShapeMismatch, "plane length differs from element count");
  }
}

BitPlaneTensor decompose(const QuantTensor& t) {
  std::vector<BitVector> planes(t.bits(), BitVector(t.size()));
  const auto data = t.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t v = data[i];
    for (unsigned m = 0; v != 0; ++m, v >>= 1) {
      if (v & 1U) planes[m].set(i, true);
    }
  }
  return BitPlaneTensor(t.shape(), std::move(planes));
}

QuantTensor recompose(const BitPlaneTensor& b) {
  std::vector<std::uint32_t> data(b.size(), 0);
  for (unsigned m = 0; m < b.bits(); ++m) {
    const BitVector& plane = b.plane(m);
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (plane.get(i)) data[i] |= std::uint32_t{1} << m;
    }
  }
  return QuantTensor(b.shape(), b.bits(), std::move(data));
}

BinaryWeightPlane::BinaryWeightPlane(Shape shape, BitVector bits)
    : shape_(std::move(shape)), bits_(std::move(bits)) {
  if (bits_.size() != element_count(shape_)) {
    raise(ErrorKind::ShapeMismatch, "weight plane length differs from shape " + to_string(shape_));
  }
}

BinaryWeightPlane BinaryWeightPlane::encode(Shape shape, std::span<const int> weights) {
  BitVector bits(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] != 1 && weights[i] != -1) {
      raise(ErrorKind::InvalidCount, "binary weights must be +1 or -1");
    }
    bits.set(i, weights[i] == 1);
  }
  return BinaryWeightPlane(std::move(shape), std::move(bits));
}

std::vector<int> BinaryWeightPlane::decode() const {
  std::vector<int> out(bits_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = weight(i);
  return out;
}

}  // namespace pisa
