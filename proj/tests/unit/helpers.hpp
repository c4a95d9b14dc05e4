#pragma once

#include <random>
#include <vector>

#include "pisa/core/tensor.hpp"
#include "pisa/error.hpp"
#include "pisa/sensor/cfp_array.hpp"

namespace testutil {

/// Kind of the pisa::Error thrown by f, InvariantViolation if none is thrown.
template <class F>
pisa::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const pisa::Error& e) {
    return e.kind();
  }
  return pisa::ErrorKind::InvariantViolation;
}

inline std::vector<pisa::BinaryWeightPlane> random_planes(std::mt19937_64& rng, std::size_t v, std::size_t rows,
                                                          std::size_t cols) {
  std::bernoulli_distribution coin(0.5);
  std::vector<pisa::BinaryWeightPlane> out;
  for (std::size_t j = 0; j < v; ++j) {
    pisa::BitVector b(rows * cols);
    for (std::size_t i = 0; i < b.size(); ++i) b.set(i, coin(rng));
    out.emplace_back(pisa::Shape{rows, cols}, b);
  }
  return out;
}

inline pisa::QuantTensor random_tensor(std::mt19937_64& rng, pisa::Shape shape, unsigned bits) {
  std::vector<std::uint32_t> v(pisa::element_count(shape));
  const std::uint64_t top = (std::uint64_t{1} << bits) - 1;
  for (auto& x : v) x = static_cast<std::uint32_t>(rng() & top);
  return pisa::QuantTensor(std::move(shape), bits, std::move(v));
}

}  // namespace testutil
