// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tsep/tensor.hpp"

namespace tsep {

template <typename T>
struct Parameter {
  std::string name;  // e.g. "mask.block[0].intra[0].attn.wq"
  Tensor<T> tensor;
};

// Ordered registry of unique learnable tensors. Registration order is the
// checkpoint order and the Adam state order.
template <typename T>
class ParameterSet {
 public:
  // Throws ContractError on a duplicate name.
  Tensor<T> add(const std::string& name, Tensor<T> tensor);

  const std::vector<Parameter<T>>& items() const { return items_; }
  std::vector<Parameter<T>>& items() { return items_; }
  const Parameter<T>* find(const std::string& name) const;

  // Number of scalars over all registered tensors.
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<Parameter<T>> items_;
};

// Uniform initializer driven by a seeded 64-bit Mersenne twister.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  template <typename T>
  Tensor<T> uniform(Shape shape, double bound);
  template <typename T>
  Tensor<T> constant(Shape shape, double value);

 private:
  std::mt19937_64 rng_;
};

template <typename T>
Tensor<T> Initializer::uniform(Shape shape, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.mutable_data()) v = static_cast<T>(dist(rng_));
  t.set_requires_grad(true);
  return t;
}

template <typename T>
Tensor<T> Initializer::constant(Shape shape, double value) {
  Tensor<T> t(std::move(shape), static_cast<T>(value));
  t.set_requires_grad(true);
  return t;
}

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace tsep
