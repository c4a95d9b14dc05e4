#include "pisa/core/bits.hpp"

#include "pisa/error.hpp"

namespace pisa {

BitVector::BitVector(std::size_t size, bool value)
    : size_(size), words_(words_for(size), value ? ~Word{0} : Word{0}) {
  clear_padding();
}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      out.set(i, true);
    } else if (bits[i] != '0') {
      raise(ErrorKind::FormatError, "bit string may only contain '0' and '1'");
    }
  }
  return out;
}

std::size_t BitVector::popcount() const noexcept {
  std::size_t count = 0;
  for (Word w : words_) count += static_cast<std::size_t>(std::popcount(w));
  return count;
}

std::size_t BitVector::popcount(std::size_t begin, std::size_t end) const noexcept {
  if (end > size_) end = size_;
  if (begin >= end) return 0;
  std::size_t count = 0;
  std::size_t first = begin / kWordBits;
  std::size_t last = (end - 1) / kWordBits;
  for (std::size_t w = first; w <= last; ++w) {
    Word word = words_[w];
    if (w == first) word &= ~Word{0} << (begin % kWordBits);
    if (w == last && end % kWordBits != 0) word &= ~Word{0} >> (kWordBits - end % kWordBits);
    count += static_cast<std::size_t>(std::popcount(word));
  }
  return count;
}

std::string BitVector::to_string() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (get(i)) out[i] = '1';
  }
  return out;
}

BitVector& BitVector::operator&=(const BitVector& other) {
  if (other.size_ != size_) raise(ErrorKind::ShapeMismatch, "bit vector sizes differ");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  return *this;
}

void BitVector::clear_padding() noexcept {
  if (size_ % kWordBits != 0 && !words_.empty()) {
    words_.back() &= ~Word{0} >> (kWordBits - size_ % kWordBits);
  }
}

}  // namespace pisa
