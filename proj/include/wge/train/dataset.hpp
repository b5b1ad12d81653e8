#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wge/core/tensor.hpp"
#include "wge/dsp/emphasis.hpp"
#include "wge/dsp/framing.hpp"
#include "wge/model/config.hpp"

namespace wge {

struct Utterance {
  std::string id;
  Waveform clean;
  Waveform noisy;
};

// Frame pairs ready for training, all (n_frames, L, 1).
//   x     pre-emphasized clean (generator target, D "real" input)
//   y     pre-emphasized noisy (D condition)
//   y_in  generator input: y, or the raw noisy frame when G has its own pre-emphasis layer
struct FrameDataset {
  Tensor x;
  Tensor y;
  Tensor y_in;
  std::vector<std::size_t> utterance;  // source utterance index per frame

  std::size_t size() const noexcept { return x.batch(); }
};

namespace detail {

inline void append_frames(std::vector<float>& dst, const FrameSet& fs) {
  for (const auto& f : fs.frames)
    for (double v : f) dst.push_back(static_cast<float>(v));
}

}  // namespace detail

inline FrameDataset build_frame_dataset(std::span<const Utterance> utts, const ModelConfig& model) {
  const std::size_t L = model.input_length;
  std::vector<float> xs, ys, yins;
  FrameDataset ds;
  for (std::size_t u = 0; u < utts.size(); ++u) {
    const auto& utt = utts[u];
    if (utt.clean.size() != utt.noisy.size()) {
      throw DataError("utterance " + utt.id + ": clean and noisy lengths differ (" + std::to_string(utt.clean.size()) +
                      " vs " + std::to_string(utt.noisy.size()) + ")");
    }
    const FrameSet fx = frame_signal(preemphasis(utt.clean, model.preemph_alpha), L);
    const FrameSet fy = frame_signal(preemphasis(utt.noisy, model.preemph_alpha), L);
    detail::append_frames(xs, fx);
    detail::append_frames(ys, fy);
    if (model.flags.preemph_layer) detail::append_frames(yins, frame_signal(utt.noisy, L));
    ds.utterance.insert(ds.utterance.end(), fx.count(), u);
  }
  const std::size_t n = ds.utterance.size();
  if (n == 0) throw DataError("training set is empty");
  ds.x = Tensor(Shape{n, L, 1}, std::move(xs));
  ds.y = Tensor(Shape{n, L, 1}, std::move(ys));
  ds.y_in = model.flags.preemph_layer ? Tensor(Shape{n, L, 1}, std::move(yins)) : ds.y;
  return ds;
}

inline Tensor gather_batch(const Tensor& src, std::span<const std::size_t> rows) {
  const std::size_t slab = src.length() * src.channels();
  Tensor out(Shape{rows.size(), src.length(), src.channels()});
  for (std::size_t b = 0; b < rows.size(); ++b) std::copy_n(src.item(rows[b]), slab, out.item(b));
  return out;
}

}  // namespace wge
