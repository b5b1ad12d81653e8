#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wge/core/error.hpp"

namespace wge {

inline constexpr int kSampleRate = 16000;

// Mono 16 kHz signal. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;

  Waveform() = default;
  explicit Waveform(std::vector<double> s) : samples(std::move(s)) {}

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  static constexpr int sample_rate() noexcept { return kSampleRate; }

  friend bool operator==(const Waveform&, const Waveform&) = default;
};

inline double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

inline void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError(std::string(what) + ": non-finite sample");
  }
}

}  // namespace wge
