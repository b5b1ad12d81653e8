#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "wge/core/adam.hpp"
#include "wge/core/error.hpp"
#include "wge/model/config.hpp"

namespace wge {

struct TrainConfig {
  ModelConfig model = ModelConfig::paper();
  double lambda_l1 = 100.0;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 100;
  std::size_t epochs = 80;
  double smoothing_value = 0.9;  // real target when label smoothing is on
  std::uint64_t seed = 1234;
  bool d_two_steps = false;
  double score_limit = 1e6;
  std::size_t score_patience = 10;

  const VariantFlags& flags() const noexcept { return model.flags; }
  double smoothing_target() const { return model.flags.label_smoothing ? smoothing_value : 1.0; }
  AdamConfig adam() const { return {lr, beta1, beta2, adam_eps}; }

  // 4+4 layers on 1024-sample frames, batch 8, 200 epochs.
  static TrainConfig desk() {
    TrainConfig c;
    c.model = ModelConfig::desk();
    c.batch_size = 8;
    c.epochs = 200;
    return c;
  }

  void validate() const {
    model.validate();
    if (!(lambda_l1 >= 0.0)) throw ConfigError("lambda_l1 must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("adam betas must be in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(smoothing_value > 0.0 && smoothing_value <= 1.0)) throw ConfigError("smoothing target must be in (0, 1]");
    if (!(score_limit > 0.0) || score_patience == 0) throw ConfigError("instability limits must be positive");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace wge
