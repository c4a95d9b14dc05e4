#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pisa {

/// Packed bit vector: 64-bit words, LSB-first within a word, element i at
/// word i/64, bit i%64. Bits past size() are always zero.
class BitVector {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitVector() = default;
  explicit BitVector(std::size_t size, bool value = false);

  /// Parses a string of '0'/'1' characters, element 0 first.
  static BitVector from_string(std::string_view bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const noexcept { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i, bool value) noexcept {
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }

  std::size_t popcount() const noexcept;
  /// Population count restricted to the half-open element range [begin, end).
  std::size_t popcount(std::size_t begin, std::size_t end) const noexcept;

  std::span<const Word> words() const noexcept { return words_; }
  std::span<Word> words() noexcept { return words_; }

  std::string to_string() const;

  BitVector& operator&=(const BitVector& other);
  friend BitVector operator&(BitVector lhs, const BitVector& rhs) { return lhs &= rhs; }
  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  void clear_padding() noexcept;

  std::size_t size_ = 0;
  std::vector<Word> words_;
};

inline std::size_t words_for(std::size_t bits) noexcept {
  return (bits + BitVector::kWordBits - 1) / BitVector::kWordBits;
}

}  // namespace pisa
