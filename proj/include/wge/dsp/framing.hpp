#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "wge/dsp/waveform.hpp"

namespace wge {

// Rectangular frames with 50% overlap; the last frame is zero-padded.
struct FrameSet {
  std::size_t frame_length = 0;
  std::size_t hop = 0;
  std::size_t original_length = 0;
  std::vector<std::vector<double>> frames;

  std::size_t count() const noexcept { return frames.size(); }
};

inline std::size_t frame_count(std::size_t length, std::size_t frame_length) {
  const std::size_t hop = frame_length / 2;
  const std::size_t excess = length > frame_length ? length - frame_length : 0;
  return (excess + hop - 1) / hop + 1;
}

inline FrameSet frame_signal(const Waveform& x, std::size_t frame_length = 16384) {
  if (x.empty()) throw DataError("frame_signal: empty signal");
  if (frame_length < 2 || frame_length % 2 != 0) {
    throw ConfigError("frame_signal: frame length must be even, got " + std::to_string(frame_length));
  }
  FrameSet fs;
  fs.frame_length = frame_length;
  fs.hop = frame_length / 2;
  fs.original_length = x.size();
  const std::size_t n = frame_count(x.size(), frame_length);
  fs.frames.assign(n, std::vector<double>(frame_length, 0.0));
  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t start = f * fs.hop;
    const std::size_t take = std::min(frame_length, x.size() - start);
    std::copy_n(x.samples.begin() + static_cast<std::ptrdiff_t>(start), take, fs.frames[f].begin());
  }
  return fs;
}

// Sums the frames back in place; samples covered by two frames are halved.
inline Waveform overlap_add(const FrameSet& fs) {
  if (fs.frame_length == 0 || fs.hop * 2 != fs.frame_length || fs.original_length == 0 ||
      fs.count() != frame_count(fs.original_length, fs.frame_length)) {
    throw DataError("overlap_add: frame set is inconsistent with its recorded geometry");
  }
  const std::size_t total = (fs.count() - 1) * fs.hop + fs.frame_length;
  std::vector<double> sum(total, 0.0);
  std::vector<unsigned char> cover(total, 0);
  for (std::size_t f = 0; f < fs.count(); ++f) {
    if (fs.frames[f].size() != fs.frame_length) {
      throw DataError("overlap_add: frame " + std::to_string(f) + " has wrong length");
    }
    const std::size_t start = f * fs.hop;
    for (std::size_t i = 0; i < fs.frame_length; ++i) {
      sum[start + i] += fs.frames[f][i];
      ++cover[start + i];
    }
  }
  Waveform out;
  out.samples.resize(fs.original_length);
  for (std::size_t i = 0; i < fs.original_length; ++i) {
    out.samples[i] = cover[i] == 2 ? sum[i] / 2.0 : sum[i];
  }
  return out;
}

}  // namespace wge
