#pragma once

#include <algorithm>
#include <cstdint>

#include "wge/core/random.hpp"
#include "wge/dsp/emphasis.hpp"
#include "wge/dsp/framing.hpp"
#include "wge/model/generator.hpp"
#include "wge/model/latent.hpp"

namespace wge {

// Frames are pushed through G in chunks; z is drawn frame by frame from one
// stream seeded with latent_seed, so the chunk size does not change the output.
inline Waveform enhance_utterance(const Generator& g, const Waveform& y, std::uint64_t latent_seed,
                                  std::size_t chunk = 16) {
  if (y.empty()) throw DataError("enhance: empty input");
  const ModelConfig& cfg = g.config();
  const std::size_t L = cfg.input_length;
  const double alpha = cfg.preemph_alpha;
  FrameSet fs = frame_signal(cfg.flags.preemph_layer ? y : preemphasis(y, alpha), L);
  Rng rng(latent_seed);
  chunk = std::max<std::size_t>(chunk, 1);
  for (std::size_t first = 0; first < fs.count(); first += chunk) {
    const std::size_t nb = std::min(chunk, fs.count() - first);
    Tensor in(Shape{nb, L, 1});
    for (std::size_t b = 0; b < nb; ++b)
      std::transform(fs.frames[first + b].begin(), fs.frames[first + b].end(), in.item(b),
                     [](double v) { return static_cast<float>(v); });
    Tensor out;
    if (cfg.flags.latent) {
      const Tensor z = sample_latent(rng, nb, g.latent_length(), g.latent_channels());
      out = g.forward(in, &z);
    } else {
      out = g.forward(in);
    }
    for (std::size_t b = 0; b < nb; ++b) std::copy_n(out.item(b), L, fs.frames[first + b].begin());
  }
  return deemphasis(overlap_add(fs), alpha);
}

}  // namespace wge
