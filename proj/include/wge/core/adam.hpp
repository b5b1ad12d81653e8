#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wge/core/parameter.hpp"

namespace wge {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

// Bias-corrected Adam. Moments are stored at parameter precision and
// updated in double.
template <typename T>
class BasicAdam {
 public:
  BasicAdam() = default;
  explicit BasicAdam(AdamConfig config) : config_(config) {}

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return t_; }
  const std::vector<BasicTensor<T>>& first_moments() const noexcept { return m_; }
  const std::vector<BasicTensor<T>>& second_moments() const noexcept { return v_; }

  // Restores serialized state; moments must line up with the parameter list
  // passed to the next step().
  void restore(std::uint64_t t, std::vector<BasicTensor<T>> m, std::vector<BasicTensor<T>> v) {
    if (m.size() != v.size()) throw ShapeError("adam: moment lists differ in length");
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  void step(std::span<BasicParameter<T>> params) {
    if (m_.empty() && t_ == 0) {
      for (const auto& p : params) {
        m_.emplace_back(p.value.shape());
        v_.emplace_back(p.value.shape());
      }
    }
    if (m_.size() != params.size()) {
      throw ShapeError("adam: state tracks " + std::to_string(m_.size()) + " parameters, got " +
                       std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = params[i];
      if (p.grad.shape() != p.value.shape() || m_[i].shape() != p.value.shape()) {
        throw ShapeError("adam: state/grad shape mismatch for parameter " + p.name);
      }
      if (!p.grad.all_finite()) throw NumericError("adam: non-finite gradient in parameter " + p.name);
    }
    if (t_ == std::numeric_limits<std::uint64_t>::max()) throw NumericError("adam: step counter overflow");
    ++t_;

    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      if (!p.trainable) continue;
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t k = 0; k < p.value.size(); ++k) {
        const double g = p.grad[k];
        const double mk = b1 * m[k] + (1.0 - b1) * g;
        const double vk = b2 * v[k] + (1.0 - b2) * g * g;
        m[k] = static_cast<T>(mk);
        v[k] = static_cast<T>(vk);
        const double update = config_.lr * (mk / c1) / (std::sqrt(vk / c2) + config_.eps);
        p.value[k] = static_cast<T>(p.value[k] - update);
      }
    }
  }

 private:
  AdamConfig config_{};
  std::uint64_t t_ = 0;
  std::vector<BasicTensor<T>> m_;
  std::vector<BasicTensor<T>> v_;
};

using Adam = BasicAdam<float>;

}  // namespace wge
