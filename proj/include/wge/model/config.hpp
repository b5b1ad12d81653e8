#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wge/core/error.hpp"

namespace wge {

// The experiment matrix: each flag switches one stabilization variant.
struct VariantFlags {
  bool instance_norm = true;     // IN in the discriminator
  bool label_smoothing = true;   // real target 0.9 instead of 1
  bool gt_layer = false;         // gammatone-initialized first layers in G and D
  bool preemph_layer = false;    // trainable 2-tap pre-emphasis in G
  bool latent = true;            // z concatenated at the bottleneck

  std::string label() const {
    std::string s;
    auto add = [&](bool on, const char* name) {
      if (!on) return;
      if (!s.empty()) s += " + ";
      s += name;
    };
    add(instance_norm, "IN");
    add(label_smoothing, "LabSmth");
    add(gt_layer, "GT");
    add(preemph_layer, "PreEm");
    if (s.empty()) s = "baseline";
    s += latent ? " (with z)" : " (without z)";
    return s;
  }

  friend bool operator==(const VariantFlags&, const VariantFlags&) = default;
};

// Layer plan shared by the generator encoder and the discriminator.
struct ModelConfig {
  std::vector<std::size_t> feature_maps{16, 32, 32, 64, 64, 128, 128, 256, 256, 512, 1024};
  std::size_t filter_width = 31;
  std::size_t stride = 2;
  std::size_t input_length = 16384;
  VariantFlags flags{};

  double gt_f_low = 1200.0;
  double gt_f_high = 7600.0;
  bool gt_trainable = true;
  double preemph_alpha = 0.95;
  float leaky_slope = 0.3f;
  double norm_eps = 1e-5;
  double init_stddev = 0.02;

  // 11 + 11 layers on 16384-sample windows.
  static ModelConfig paper() { return ModelConfig{}; }

  // 4 + 4 layers on 1024-sample windows.
  static ModelConfig desk() {
    ModelConfig c;
    c.feature_maps = {16, 32, 64, 128};
    c.input_length = 1024;
    return c;
  }

  std::size_t n_layers() const noexcept { return feature_maps.size(); }

  std::size_t bottleneck_length() const {
    std::size_t len = input_length;
    for (std::size_t i = 0; i < n_layers(); ++i) len /= stride;
    return len;
  }
  std::size_t bottleneck_channels() const { return feature_maps.back(); }

  void validate() const {
    if (feature_maps.empty()) throw ConfigError("model: feature_maps must not be empty");
    for (auto f : feature_maps)
      if (f == 0) throw ConfigError("model: feature map counts must be positive");
    if (filter_width == 0) throw ConfigError("model: filter_width must be positive");
    if (stride < 2) throw ConfigError("model: stride must be at least 2");
    std::size_t div = 1;
    for (std::size_t i = 0; i < n_layers(); ++i) div *= stride;
    if (input_length == 0 || input_length % div != 0) {
      throw ConfigError("model: input_length " + std::to_string(input_length) +
                        " is not divisible by stride^n_layers = " + std::to_string(div));
    }
    if (flags.gt_layer && feature_maps.front() < 1) throw ConfigError("model: GT layer needs filters");
    if (!(preemph_alpha >= 0.0 && preemph_alpha < 1.0)) throw ConfigError("model: preemph_alpha must be in [0, 1)");
    if (!(init_stddev > 0.0)) throw ConfigError("model: init_stddev must be positive");
    if (!(norm_eps > 0.0)) throw ConfigError("model: norm_eps must be positive");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace wge
