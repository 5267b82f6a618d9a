// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/params.hpp"

#include <cmath>

#include "tsep/optim.hpp"

namespace tsep {

template <typename T>
Tensor<T> ParameterSet<T>::add(const std::string& name, Tensor<T> tensor) {
  if (find(name)) throw ContractError("duplicate parameter name: " + name);
  tensor.set_requires_grad(true);
  items_.push_back({name, tensor});
  return tensor;
}

template <typename T>
const Parameter<T>* ParameterSet<T>::find(const std::string& name) const {
  for (const auto& p : items_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += p.tensor.size();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& p : items_) p.tensor.zero_grad();
}

void AdamHyper::validate() const {
  if (!(lr > 0)) throw ConfigError("adam: lr must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ConfigError("adam: betas must lie in [0, 1)");
  }
  if (!(eps > 0)) throw ConfigError("adam: eps must be positive");
}

template <typename T>
Adam<T>::Adam(ParameterSet<T>& params, AdamHyper hyper) : params_(&params), hyper_(hyper) {
  hyper_.validate();
  for (const auto& p : params.items()) {
    m_.emplace_back(p.tensor.shape());
    v_.emplace_back(p.tensor.shape());
  }
}

template <typename T>
void Adam<T>::step() {
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(hyper_.beta1, t);
  const double c2 = 1.0 - std::pow(hyper_.beta2, t);
  const T b1 = static_cast<T>(hyper_.beta1), b2 = static_cast<T>(hyper_.beta2);
  auto& items = params_->items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    Tensor<T>& param = items[i].tensor;
    auto value = param.mutable_data();
    auto g = param.grad();
    auto m = m_[i].mutable_data();
    auto v = v_[i].mutable_data();
    for (std::size_t j = 0; j < value.size(); ++j) {
      m[j] = b1 * m[j] + (T{1} - b1) * g[j];
      v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      value[j] -= static_cast<T>(hyper_.lr * mhat / (std::sqrt(vhat) + hyper_.eps));
    }
  }
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace tsep
