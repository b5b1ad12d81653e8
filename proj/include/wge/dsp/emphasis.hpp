#pragma once

#include <string>

#include "wge/dsp/waveform.hpp"

namespace wge {

inline void check_emphasis_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ConfigError("emphasis coefficient must lie in [0, 1), got " + std::to_string(alpha));
  }
}

// y[n] = x[n] - alpha * x[n-1], x[-1] = 0.
inline Waveform preemphasis(const Waveform& x, double alpha) {
  check_emphasis_alpha(alpha);
  Waveform y;
  y.samples.resize(x.size());
  double prev = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    y.samples[n] = x.samples[n] - alpha * prev;
    prev = x.samples[n];
  }
  return y;
}

// Inverse of preemphasis: y[n] = x[n] + alpha * y[n-1], y[-1] = 0.
inline Waveform deemphasis(const Waveform& x, double alpha) {
  check_emphasis_alpha(alpha);
  Waveform y;
  y.samples.resize(x.size());
  double prev = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    prev = x.samples[n] + alpha * prev;
    y.samples[n] = prev;
  }
  return y;
}

}  // namespace wge
