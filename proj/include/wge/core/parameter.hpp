#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wge/core/tensor.hpp"

namespace wge {

// A learnable array and its gradient accumulator.
template <typename T>
struct BasicParameter {
  std::string name;
  BasicTensor<T> value;
  BasicTensor<T> grad;
  bool trainable = true;

  BasicParameter() = default;
  BasicParameter(std::string n, BasicTensor<T> v, bool train = true)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()), trainable(train) {}

  void zero_grad() { grad = BasicTensor<T>(value.shape()); }

  void accumulate(const BasicTensor<T>& g) {
    if (g.shape() != value.shape()) {
      throw ShapeError("gradient for " + name + " has shape " + g.shape().str() +
                       ", parameter is " + value.shape().str());
    }
    grad += g;
  }

  friend bool operator==(const BasicParameter&, const BasicParameter&) = default;
};

using Parameter = BasicParameter<float>;

template <typename T>
void zero_grads(std::span<BasicParameter<T>> params) {
  for (auto& p : params) p.zero_grad();
}

template <typename T>
const BasicParameter<T>& find_parameter(std::span<const BasicParameter<T>> params,
                                        const std::string& name) {
  auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) { return p.name == name; });
  if (it == params.end()) throw ConfigError("no parameter named '" + name + "'");
  return *it;
}

}  // namespace wge
