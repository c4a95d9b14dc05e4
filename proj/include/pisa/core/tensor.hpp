#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pisa/core/bits.hpp"

namespace pisa {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

inline constexpr unsigned kMaxBits = 32;

/// Unsigned fixed-point tensor, row-major. Every element is < 2^bits.
class QuantTensor {
 public:
  QuantTensor() = default;
  /// Zero tensor.
  QuantTensor(Shape shape, unsigned bits);
  /// Validates the element count and the per-element range.
  QuantTensor(Shape shape, unsigned bits, std::vector<std::uint32_t> data);

  const Shape& shape() const noexcept { return shape_; }
  unsigned bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const std::uint32_t> data() const noexcept { return data_; }

  std::uint32_t operator[](std::size_t i) const noexcept { return data_[i]; }
  std::uint32_t max_value() const noexcept;

  /// Returns a copy with a new shape of equal element count.
  QuantTensor reshaped(Shape shape) const;

  friend bool operator==(const QuantTensor&, const QuantTensor&) = default;

 private:
  Shape shape_;
  unsigned bits_ = 1;
  std::vector<std::uint32_t> data_;
};

/// Bit-plane decomposition of a QuantTensor: plane m holds bit m of every
/// element, LSB plane first.
class BitPlaneTensor {
 public:
  BitPlaneTensor() = default;
  BitPlaneTensor(Shape shape, std::vector<BitVector> planes);

  const Shape& shape() const noexcept { return shape_; }
  unsigned bits() const noexcept { return static_cast<unsigned>(planes_.size()); }
  std::size_t size() const noexcept { return element_count(shape_); }
  const BitVector& plane(unsigned m) const { return planes_.at(m); }
  std::span<const BitVector> planes() const noexcept { return planes_; }

  friend bool operator==(const BitPlaneTensor&, const BitPlaneTensor&) = default;

 private:
  Shape shape_;
  std::vector<BitVector> planes_;
};

BitPlaneTensor decompose(const QuantTensor& t);
QuantTensor recompose(const BitPlaneTensor& b);

/// Binary {+1,-1} weights packed one bit per weight: 1 is +1, 0 is -1.
class BinaryWeightPlane {
 public:
  BinaryWeightPlane() = default;
  BinaryWeightPlane(Shape shape, BitVector bits);

  static BinaryWeightPlane encode(Shape shape, std::span<const int> weights);
  std::vector<int> decode() const;

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return bits_.size(); }
  int weight(std::size_t i) const noexcept { return bits_.get(i) ? 1 : -1; }
  const BitVector& bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryWeightPlane&, const BinaryWeightPlane&) = default;

 private:
  Shape shape_;
  BitVector bits_;
};

}  // namespace pisa
