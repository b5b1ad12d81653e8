#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "wge/core/error.hpp"
#include "wge/dsp/waveform.hpp"

namespace wge {

// Glasberg & Moore equivalent rectangular bandwidth, Hz.
inline double erb_bandwidth(double f_hz) {
  if (!(f_hz >= 0.0)) throw ConfigError("erb_bandwidth: frequency must be non-negative");
  return 24.7 * (4.37 * f_hz / 1000.0 + 1.0);
}

// ERB-rate scale and its inverse.
inline double erb_rate(double f_hz) { return 21.4 * std::log10(1.0 + 0.00437 * f_hz); }
inline double erb_rate_to_hz(double e) { return (std::pow(10.0, e / 21.4) - 1.0) / 0.00437; }

// n frequencies equally spaced in ERB rate, both endpoints included.
inline std::vector<double> erb_space(double f_low, double f_high, std::size_t n, double fs = kSampleRate) {
  if (!(f_low > 0.0 && f_low < f_high && f_high < fs / 2.0)) {
    throw ConfigError("erb_space: need 0 < f_low < f_high < fs/2, got [" + std::to_string(f_low) + ", " +
                      std::to_string(f_high) + "] at fs " + std::to_string(fs));
  }
  if (n == 0) throw ConfigError("erb_space: need at least one frequency");
  if (n == 1) return {f_low};
  const double lo = erb_rate(f_low), hi = erb_rate(f_high);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = erb_rate_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = f_low;
  out.back() = f_high;
  return out;
}

// |DFT| of an FIR at bins 0 .. n_fft/2.
inline std::vector<double> magnitude_response(std::span<const double> taps, std::size_t n_fft = 1024) {
  std::vector<double> mag(n_fft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const double w = -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n_fft);
      acc += taps[t] * std::complex<double>(std::cos(w), std::sin(w));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

// Frequency (Hz) of the largest |DFT| bin.
inline double peak_frequency(std::span<const double> taps, double fs = kSampleRate, std::size_t n_fft = 1024) {
  const auto mag = magnitude_response(taps, n_fft);
  const auto it = std::max_element(mag.begin(), mag.end());
  return static_cast<double>(it - mag.begin()) * fs / static_cast<double>(n_fft);
}

struct GammatoneBank {
  std::size_t n_filters = 0;
  std::size_t width = 0;
  int order = 4;
  double fs = kSampleRate;
  std::vector<double> center_freqs;       // ascending, Hz
  std::vector<std::vector<double>> kernels;  // n_filters impulse responses of `width` taps

  double tap(std::size_t t, std::size_t filter) const { return kernels[filter][t]; }
};

// Sampled 4th-order gammatone impulse responses
//   g(t) = t^(order-1) exp(-2 pi 1.019 ERB(fc) t) cos(2 pi fc t),  t = k / fs,
// each scaled so its peak 1024-point |DFT| is 1.
//
// With 31 taps a filter cannot resolve centres much below ~1.2 kHz; such
// kernels come out low-pass and their response peak drifts off fc.
inline GammatoneBank design_gammatone_bank(std::size_t n_filters, double f_low, double f_high,
                                           double fs = kSampleRate, std::size_t width = 31, int order = 4) {
  if (f_high >= fs / 2.0) {
    throw ConfigError("design_gammatone_bank: f_high " + std::to_string(f_high) + " Hz is not below Nyquist");
  }
  if (width == 0) throw ConfigError("design_gammatone_bank: width must be positive");
  if (order < 1) throw ConfigError("design_gammatone_bank: order must be at least 1");
  GammatoneBank bank;
  bank.n_filters = n_filters;
  bank.width = width;
  bank.order = order;
  bank.fs = fs;
  bank.center_freqs = erb_space(f_low, f_high, n_filters, fs);
  for (double fc : bank.center_freqs) {
    const double b = 1.019 * erb_bandwidth(fc);
    std::vector<double> k(width);
    for (std::size_t n = 0; n < width; ++n) {
      const double t = static_cast<double>(n) / fs;
      k[n] = std::pow(t, order - 1) * std::exp(-2.0 * std::numbers::pi * b * t) *
             std::cos(2.0 * std::numbers::pi * fc * t);
    }
    const auto mag = magnitude_response(k);
    const double peak = *std::max_element(mag.begin(), mag.end());
    if (!(peak > 0.0)) throw NumericError("design_gammatone_bank: degenerate kernel at " + std::to_string(fc));
    for (double& v : k) v /= peak;
    bank.kernels.push_back(std::move(k));
  }
  return bank;
}

}  // namespace wge
