// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "tsep/params.hpp"

namespace tsep {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

// Bias-corrected Adam over every tensor of a ParameterSet. First and second
// moments are kept in registration order.
template <typename T>
class Adam {
 public:
  Adam(ParameterSet<T>& params, AdamHyper hyper);

  void step();

  std::uint64_t steps() const { return step_; }
  const AdamHyper& hyper() const { return hyper_; }
  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  const std::vector<Tensor<T>>& first_moments() const { return m_; }
  const std::vector<Tensor<T>>& second_moments() const { return v_; }
  void set_steps(std::uint64_t s) { step_ = s; }

 private:
  ParameterSet<T>* params_;
  AdamHyper hyper_;
  std::vector<Tensor<T>> m_, v_;
  std::uint64_t step_ = 0;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace tsep
