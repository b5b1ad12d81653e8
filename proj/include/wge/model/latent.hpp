#pragma once

#include <cstddef>
#include <cstdint>

#include "wge/core/random.hpp"
#include "wge/core/tensor.hpp"

namespace wge {

struct LatentSpec {
  std::size_t length = 8;
  std::size_t channels = 1024;
  std::uint64_t seed = 0;
};

// i.i.d. N(0, 1) entries of shape (batch, length, channels) from `rng`.
inline Tensor sample_latent(Rng& rng, std::size_t batch, std::size_t length, std::size_t channels) {
  Tensor z(Shape{batch, length, channels});
  for (auto& v : z.values()) v = static_cast<float>(rng.normal());
  return z;
}

inline Tensor sample_latent(const LatentSpec& spec, std::size_t batch) {
  Rng rng(spec.seed);
  return sample_latent(rng, batch, spec.length, spec.channels);
}

}  // namespace wge
