#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wge/core/conv.hpp"
#include "wge/core/layers.hpp"
#include "wge/core/parameter.hpp"
#include "wge/core/random.hpp"
#include "wge/model/config.hpp"
#include "wge/model/generator.hpp"

namespace wge {

template <typename T>
struct BasicDiscriminatorTrace {
  std::vector<BasicTensor<T>> conv_in;  // [a, y] for layer 0, then previous activations
  std::vector<BasicTensor<T>> pre;      // conv outputs
  std::vector<BasicTensor<T>> normed;   // after IN (== pre when IN is off)
  BasicTensor<T> head_in;
  BasicTensor<T> head_out;
};

// Scores (enhanced or clean, noisy) pairs. Output shape (batch, 1, 1), linear.
template <typename T>
class BasicDiscriminator {
 public:
  static BasicDiscriminator build(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    BasicDiscriminator d;
    d.config_ = config;
    Rng rng(seed);
    const std::size_t n = config.n_layers();
    const std::size_t w = config.filter_width;
    const auto& fm = config.feature_maps;
    std::size_t c_in = 2;
    for (std::size_t l = 0; l < n; ++l) {
      BasicTensor<T> kernel = detail::truncated_normal_tensor<T>(rng, Shape{w, c_in, fm[l]}, config.init_stddev);
      bool trainable = true;
      if (l == 0 && config.flags.gt_layer) {
        kernel = detail::gammatone_kernel<T>(detail::model_gammatone_bank(config), c_in);
        trainable = config.gt_trainable;
      }
      const std::string p = "d.enc." + std::to_string(l);
      d.params_.emplace_back(p + ".kernel", std::move(kernel), trainable);
      d.params_.emplace_back(p + ".bias", BasicTensor<T>(Shape{1, 1, fm[l]}));
      c_in = fm[l];
    }
    d.params_.emplace_back("d.head.kernel",
                           detail::truncated_normal_tensor<T>(rng, Shape{1, fm.back(), 1}, config.init_stddev));
    d.params_.emplace_back("d.head.bias", BasicTensor<T>(Shape{1, 1, 1}));
    const std::size_t lb = config.bottleneck_length();
    d.params_.emplace_back("d.dense.weight",
                           detail::truncated_normal_tensor<T>(rng, Shape{1, lb, 1}, config.init_stddev));
    d.params_.emplace_back("d.dense.bias", BasicTensor<T>(Shape{1, 1, 1}));
    return d;
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<BasicParameter<T>>& parameters() noexcept { return params_; }
  const std::vector<BasicParameter<T>>& parameters() const noexcept { return params_; }

  BasicParameter<T>& parameter(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return p;
    throw ConfigError("discriminator has no parameter '" + name + "'");
  }

  // a: clean or enhanced (b, L, 1); y: noisy (b, L, 1).
  BasicTensor<T> forward(const BasicTensor<T>& a, const BasicTensor<T>& y, BasicDiscriminatorTrace<T>* trace = nullptr) const {
    const std::size_t L = config_.input_length;
    if (a.shape() != Shape{a.batch(), L, 1} || y.shape() != a.shape()) {
      throw ShapeError("discriminator: expected two (b, " + std::to_string(L) + ", 1) inputs, got " +
                       a.shape().str() + " and " + y.shape().str());
    }
    const std::size_t n = config_.n_layers();
    const bool in = config_.flags.instance_norm;
    BasicDiscriminatorTrace<T> local;
    BasicDiscriminatorTrace<T>& tr = trace ? *trace : local;
    tr = BasicDiscriminatorTrace<T>{};

    BasicTensor<T> h = concat_channels(a, y);
    for (std::size_t l = 0; l < n; ++l) {
      BasicTensor<T> pre = conv1d(h, kernel(l), bias(l), config_.stride);
      BasicTensor<T> normed = in ? instance_norm(pre, config_.norm_eps) : pre;
      BasicTensor<T> act = leaky_relu(normed, static_cast<T>(config_.leaky_slope));
      if (trace) {
        tr.conv_in.push_back(std::move(h));
        tr.pre.push_back(std::move(pre));
        tr.normed.push_back(std::move(normed));
      }
      h = std::move(act);
    }
    BasicTensor<T> head = conv1d(h, value(2 * n), value(2 * n + 1), 1);
    BasicTensor<T> score = dense(head, value(2 * n + 2), value(2 * n + 3));
    if (trace) {
      tr.head_in = std::move(h);
      tr.head_out = std::move(head);
    }
    return score;
  }

  // Backpropagates d(loss)/d(score). Parameter gradients are accumulated when
  // `param_grads` is set; returns d(loss)/d(a) when `input_grad` is set.
  BasicTensor<T> backward(const BasicDiscriminatorTrace<T>& tr, const BasicTensor<T>& grad_score, bool param_grads = true,
                  bool input_grad = false) {
    const std::size_t n = config_.n_layers();
    if (tr.pre.size() != n || grad_score.shape() != Shape{tr.head_out.batch(), 1, 1}) {
      throw ShapeError("discriminator backward: trace does not match a forward pass of this model");
    }
    auto dg = dense_backward(grad_score, tr.head_out, value(2 * n + 2), true);
    if (param_grads) {
      params_[2 * n + 2].accumulate(dg.weight);
      params_[2 * n + 3].accumulate(dg.bias);
    }
    auto hg = conv1d_backward(dg.input, tr.head_in, value(2 * n), true, 1, Padding::Same, true, param_grads);
    if (param_grads) {
      params_[2 * n].accumulate(hg.kernel);
      params_[2 * n + 1].accumulate(hg.bias);
    }
    BasicTensor<T> g = std::move(hg.input);
    for (std::size_t l = n; l-- > 0;) {
      g = leaky_relu_backward(g, tr.normed[l], static_cast<T>(config_.leaky_slope));
      if (config_.flags.instance_norm) g = instance_norm_backward(g, tr.pre[l], config_.norm_eps);
      const bool need_input = l > 0 || input_grad;
      auto cg = conv1d_backward(g, tr.conv_in[l], kernel(l), true, config_.stride, Padding::Same, need_input,
                                param_grads);
      if (param_grads) {
        params_[2 * l].accumulate(cg.kernel);
        params_[2 * l + 1].accumulate(cg.bias);
      }
      if (!need_input) return BasicTensor<T>{};
      g = std::move(cg.input);
    }
    return split_channels(g, 1).first;
  }

 private:
  const BasicTensor<T>& value(std::size_t i) const { return params_[i].value; }
  const BasicTensor<T>& kernel(std::size_t layer) const { return params_[2 * layer].value; }
  const BasicTensor<T>& bias(std::size_t layer) const { return params_[2 * layer + 1].value; }

  ModelConfig config_;
  std::vector<BasicParameter<T>> params_;
};

using DiscriminatorTrace = BasicDiscriminatorTrace<float>;
using Discriminator = BasicDiscriminator<float>;

}  // namespace wge
