#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wge/core/conv.hpp"
#include "wge/core/layers.hpp"
#include "wge/core/parameter.hpp"
#include "wge/core/random.hpp"
#include "wge/dsp/gammatone.hpp"
#include "wge/model/config.hpp"

namespace wge {

namespace detail {

template <typename T = float>
BasicTensor<T> truncated_normal_tensor(Rng& rng, Shape shape, double stddev) {
  BasicTensor<T> t(shape);
  for (auto& v : t.values()) v = static_cast<T>(rng.truncated_normal(stddev));
  return t;
}

// Conv kernel (width, c_in, n_filters) whose filter f realizes convolution
// with gammatone f; taps are time-reversed because conv1d correlates.
template <typename T = float>
BasicTensor<T> gammatone_kernel(const GammatoneBank& bank, std::size_t c_in) {
  BasicTensor<T> k(Shape{bank.width, c_in, bank.n_filters});
  for (std::size_t t = 0; t < bank.width; ++t)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t f = 0; f < bank.n_filters; ++f)
        k(t, c, f) = static_cast<T>(bank.tap(bank.width - 1 - t, f));
  return k;
}

inline GammatoneBank model_gammatone_bank(const ModelConfig& config) {
  return design_gammatone_bank(config.feature_maps.front(), config.gt_f_low, config.gt_f_high, kSampleRate,
                               config.filter_width);
}

}  // namespace detail

// Activations kept from a forward pass for the matching backward pass.
template <typename T>
struct BasicGeneratorTrace {
  BasicTensor<T> input;                 // y as given
  std::vector<BasicTensor<T>> enc_pre;  // conv outputs before PReLU
  std::vector<BasicTensor<T>> enc_act;  // PReLU outputs
  std::vector<BasicTensor<T>> dec_in;   // transpose-conv inputs (after concatenation)
  std::vector<BasicTensor<T>> dec_pre;  // transpose-conv outputs
  BasicTensor<T> first_conv_input;      // y, or y after the pre-emphasis layer
  std::size_t latent_channels = 0;
};

// Encoder-decoder generator with U-shaped skip connections (channel
// concatenation) and optional latent input at the bottleneck.
template <typename T>
class BasicGenerator {
 public:
  static BasicGenerator build(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    BasicGenerator g;
    g.config_ = config;
    Rng rng(seed);
    const std::size_t n = config.n_layers();
    const std::size_t w = config.filter_width;
    const auto& fm = config.feature_maps;

    if (config.flags.preemph_layer) {
      const T a = static_cast<T>(config.preemph_alpha);
      g.preemph_ = g.add("g.preemph.kernel", BasicTensor<T>(Shape{2, 1, 1}, std::vector<T>{-a, T(1)}));
    }
    std::size_t c_in = 1;
    for (std::size_t l = 0; l < n; ++l) {
      Layer layer;
      BasicTensor<T> kernel = detail::truncated_normal_tensor<T>(rng, Shape{w, c_in, fm[l]}, config.init_stddev);
      bool trainable = true;
      if (l == 0 && config.flags.gt_layer) {
        kernel = detail::gammatone_kernel<T>(detail::model_gammatone_bank(config), c_in);
        trainable = config.gt_trainable;
      }
      const std::string p = "g.enc." + std::to_string(l);
      layer.kernel = g.add(p + ".kernel", std::move(kernel), trainable);
      layer.bias = g.add(p + ".bias", BasicTensor<T>(Shape{1, 1, fm[l]}));
      layer.slope = g.add(p + ".prelu", BasicTensor<T>(Shape{1, 1, fm[l]}));
      g.enc_.push_back(layer);
      c_in = fm[l];
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t in = j == 0 ? fm[n - 1] * (config.flags.latent ? 2 : 1) : 2 * fm[n - 1 - j];
      const std::size_t out = j + 1 < n ? fm[n - 2 - j] : 1;
      Layer layer;
      const std::string p = "g.dec." + std::to_string(j);
      layer.kernel = g.add(p + ".kernel", detail::truncated_normal_tensor<T>(rng, Shape{w, out, in}, config.init_stddev));
      layer.bias = g.add(p + ".bias", BasicTensor<T>(Shape{1, 1, out}));
      if (j + 1 < n) layer.slope = g.add(p + ".prelu", BasicTensor<T>(Shape{1, 1, out}));
      g.dec_.push_back(layer);
    }
    return g;
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<BasicParameter<T>>& parameters() noexcept { return params_; }
  const std::vector<BasicParameter<T>>& parameters() const noexcept { return params_; }

  BasicParameter<T>& parameter(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return p;
    throw ConfigError("generator has no parameter '" + name + "'");
  }

  std::size_t latent_length() const { return config_.bottleneck_length(); }
  std::size_t latent_channels() const { return config_.bottleneck_channels(); }

  // y: (batch, input_length, 1); z: (batch, bottleneck_length, bottleneck_channels)
  // present exactly when the latent variant is on.
  BasicTensor<T> forward(const BasicTensor<T>& y, const BasicTensor<T>* z = nullptr, BasicGeneratorTrace<T>* trace = nullptr) const {
    check_inputs(y, z);
    const std::size_t n = config_.n_layers();
    const std::size_t s = config_.stride;
    BasicGeneratorTrace<T> local;
    BasicGeneratorTrace<T>& tr = trace ? *trace : local;
    tr = BasicGeneratorTrace<T>{};
    if (trace) tr.input = y;

    BasicTensor<T> x = y;
    if (preemph_) x = conv1d(y, value(*preemph_), BasicTensor<T>{}, 1, Padding::Causal);
    if (trace) tr.first_conv_input = x;

    for (std::size_t l = 0; l < n; ++l) {
      const Layer& L = enc_[l];
      BasicTensor<T> pre = conv1d(l == 0 ? x : tr.enc_act.back(), value(L.kernel), value(L.bias), s);
      BasicTensor<T> act = prelu(pre, value(*L.slope));
      if (trace) tr.enc_pre.push_back(std::move(pre));
      tr.enc_act.push_back(std::move(act));
    }

    BasicTensor<T> h = tr.enc_act.back();
    if (z) {
      h = concat_channels(h, *z);
      tr.latent_channels = z->channels();
    }
    for (std::size_t j = 0; j < n; ++j) {
      const Layer& L = dec_[j];
      if (j > 0) h = concat_channels(h, tr.enc_act[n - 1 - j]);
      BasicTensor<T> pre = conv1d_transpose(h, value(L.kernel), value(L.bias), s);
      if (trace) tr.dec_in.push_back(std::move(h));
      if (L.slope) {
        h = prelu(pre, value(*L.slope));
      } else {
        h = pre;
      }
      if (trace) tr.dec_pre.push_back(std::move(pre));
    }
    return h;
  }

  // Accumulates parameter gradients for d(loss)/d(output) = grad_output.
  void backward(const BasicGeneratorTrace<T>& tr, const BasicTensor<T>& grad_output) {
    const std::size_t n = config_.n_layers();
    const std::size_t s = config_.stride;
    if (tr.dec_pre.size() != n || tr.enc_pre.size() != n || grad_output.shape() != tr.dec_pre.back().shape()) {
      throw ShapeError("generator backward: trace does not match a forward pass of this model");
    }
    std::vector<BasicTensor<T>> enc_grad(n);
    BasicTensor<T> g = grad_output;
    for (std::size_t jj = n; jj-- > 0;) {
      Layer& L = dec_[jj];
      if (L.slope) {
        auto pg = prelu_backward(g, tr.dec_pre[jj], value(*L.slope));
        params_[*L.slope].accumulate(pg.slope);
        g = std::move(pg.input);
      }
      auto cg = conv1d_transpose_backward(g, tr.dec_in[jj], value(L.kernel), true, s);
      params_[L.kernel].accumulate(cg.kernel);
      params_[L.bias].accumulate(cg.bias);
      if (jj > 0) {
        const std::size_t c_prev = tr.dec_pre[jj - 1].channels();
        auto [g_dec, g_skip] = split_channels(cg.input, c_prev);
        add_into(enc_grad[n - 1 - jj], g_skip);
        g = std::move(g_dec);
      } else {
        const std::size_t c_enc = tr.enc_act.back().channels();
        auto parts = split_channels(cg.input, c_enc);
        add_into(enc_grad[n - 1], parts.first);
      }
    }
    for (std::size_t l = n; l-- > 0;) {
      Layer& L = enc_[l];
      auto pg = prelu_backward(enc_grad[l], tr.enc_pre[l], value(*L.slope));
      params_[*L.slope].accumulate(pg.slope);
      const BasicTensor<T>& in = l == 0 ? tr.first_conv_input : tr.enc_act[l - 1];
      const bool need_input = l > 0 || preemph_.has_value();
      auto cg = conv1d_backward(pg.input, in, value(L.kernel), true, s, Padding::Same, need_input);
      params_[L.kernel].accumulate(cg.kernel);
      params_[L.bias].accumulate(cg.bias);
      if (l > 0) {
        add_into(enc_grad[l - 1], cg.input);
      } else if (preemph_) {
        auto pe = conv1d_backward(cg.input, tr.input, value(*preemph_), false, 1, Padding::Causal, false);
        params_[*preemph_].accumulate(pe.kernel);
      }
    }
  }

  // Output of the pre-emphasis layer (or y itself when the layer is off).
  BasicTensor<T> first_layer_output(const BasicTensor<T>& y) const {
    if (!preemph_) return y;
    return conv1d(y, value(*preemph_), BasicTensor<T>{}, 1, Padding::Causal);
  }

 private:
  struct Layer {
    std::size_t kernel = 0;
    std::size_t bias = 0;
    std::optional<std::size_t> slope;
  };

  std::size_t add(std::string name, BasicTensor<T> value, bool trainable = true) {
    params_.emplace_back(std::move(name), std::move(value), trainable);
    return params_.size() - 1;
  }

  const BasicTensor<T>& value(std::size_t index) const { return params_[index].value; }

  static void add_into(BasicTensor<T>& acc, const BasicTensor<T>& g) {
    if (acc.empty()) {
      acc = g;
    } else {
      acc += g;
    }
  }

  void check_inputs(const BasicTensor<T>& y, const BasicTensor<T>* z) const {
    if (y.length() != config_.input_length || y.channels() != 1) {
      throw ShapeError("generator: expected input (b, " + std::to_string(config_.input_length) + ", 1), got " +
                       y.shape().str());
    }
    if (config_.flags.latent && !z) throw ShapeError("generator: latent variant requires z");
    if (!config_.flags.latent && z) throw ShapeError("generator: z given but the latent variant is off");
    if (z) {
      const Shape want{y.batch(), latent_length(), latent_channels()};
      if (z->shape() != want) {
        throw ShapeError("generator: z has shape " + z->shape().str() + ", expected " + want.str());
      }
    }
  }

  ModelConfig config_;
  std::vector<BasicParameter<T>> params_;
  std::optional<std::size_t> preemph_;
  std::vector<Layer> enc_;
  std::vector<Layer> dec_;
};

using GeneratorTrace = BasicGeneratorTrace<float>;
using Generator = BasicGenerator<float>;

}  // namespace wge
