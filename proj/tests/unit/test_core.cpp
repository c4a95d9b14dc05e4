#include <random>

#include "doctest.h"

#include "pisa/core/bits.hpp"
#include "pisa/core/tensor.hpp"
#include "pisa/error.hpp"

using namespace pisa;

TEST_CASE("bit vector string round trip and padding") {
  const BitVector b = BitVector::from_string("0110");
  CHECK(b.size() == 4);
  CHECK(b.to_string() == "0110");
  CHECK(b.popcount() == 2);

  BitVector ones(70, true);
  CHECK(ones.popcount() == 70);
  CHECK(ones.words().size() == 2);
  CHECK(ones.words()[1] == (BitVector::Word{1} << 6) - 1);
  CHECK(ones.popcount(3, 67) == 64);
  CHECK_THROWS(BitVector::from_string("01x"));
}

TEST_CASE("LSB plane of [0,1,1,0]") {
  const QuantTensor t({4}, 3, {0, 3, 5, 2});
  const BitPlaneTensor b = decompose(t);
  CHECK(b.bits() == 3);
  CHECK(b.plane(0).to_string() == "0110");
  CHECK(b.plane(1).to_string() == "0101");
  CHECK(b.plane(2).to_string() == "0010");
}

TEST_CASE("zero tensor decomposes to zero planes") {
  const BitPlaneTensor b = decompose(QuantTensor({3, 3}, 3));
  for (unsigned m = 0; m < 3; ++m) CHECK(b.plane(m).popcount() == 0);
}

TEST_CASE("decompose matches per-element bit extraction") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::uint32_t> d(0, 7);
  std::vector<std::uint32_t> v(16);
  for (auto& x : v) x = d(rng);
  const QuantTensor t({4, 4}, 3, v);
  const BitPlaneTensor b = decompose(t);
  for (unsigned m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < 16; ++i) CHECK(b.plane(m).get(i) == (((v[i] >> m) & 1U) != 0));
  }
  CHECK(recompose(b) == t);
}

TEST_CASE("recompose examples") {
  const BitPlaneTensor b({1}, {BitVector::from_string("1"), BitVector::from_string("0"), BitVector::from_string("1")});
  CHECK(recompose(b)[0] == 5);
  const QuantTensor one = recompose(BitPlaneTensor({4}, {BitVector::from_string("0110")}));
  CHECK(std::vector<std::uint32_t>(one.data().begin(), one.data().end()) == std::vector<std::uint32_t>{0, 1, 1, 0});
}

TEST_CASE("decompose round trip across widths") {
  std::mt19937_64 rng(11);
  for (unsigned bits : {1U, 2U, 5U, 16U, 32U}) {
    std::vector<std::uint32_t> v(37);
    const std::uint64_t top = (std::uint64_t{1} << bits) - 1;
    for (auto& x : v) x = static_cast<std::uint32_t>(rng() & top);
    const QuantTensor t({37}, bits, v);
    CHECK(recompose(decompose(t)) == t);
  }
}

TEST_CASE("tensor contract errors") {
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvariantViolation;
  };
  CHECK(kind_of([] { QuantTensor({2, 2}, 2, {0, 1, 2}); }) == ErrorKind::ShapeMismatch);
  CHECK(kind_of([] { QuantTensor({2}, 2, {0, 4}); }) == ErrorKind::InvalidCount);
  CHECK(kind_of([] { QuantTensor({2}, 0); }) == ErrorKind::InvalidCount);
  CHECK(kind_of([] { QuantTensor({2}, 33); }) == ErrorKind::InvalidCount);
  const std::vector<int> bad{1, 0};
  CHECK(kind_of([&] { BinaryWeightPlane::encode({2}, bad); }) == ErrorKind::InvalidCount);
}

TEST_CASE("binary weight plane encoding") {
  const std::vector<int> w{1, -1, -1, 1};
  const BinaryWeightPlane p = BinaryWeightPlane::encode({2, 2}, w);
  CHECK(p.bits().to_string() == "1001");
  CHECK(p.decode() == w);
}
