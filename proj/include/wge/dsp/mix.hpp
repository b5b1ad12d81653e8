#pragma once

#include <cmath>
#include <span>
#include <string>

#include "wge/dsp/waveform.hpp"

namespace wge {

// Gain g such that 10 log10(P_clean / P_{g * noise}) = snr_db over the
// whole utterance; noise is truncated to the clean length.
inline double noise_gain(const Waveform& clean, const Waveform& noise, double snr_db) {
  if (!std::isfinite(snr_db)) throw ConfigError("mix_at_snr: SNR must be finite; use the clean signal directly");
  if (clean.empty()) throw DataError("mix_at_snr: empty clean signal");
  if (noise.size() < clean.size()) {
    throw DataError("mix_at_snr: noise (" + std::to_string(noise.size()) +
                    " samples) shorter than clean (" + std::to_string(clean.size()) + ")");
  }
  const double pc = mean_power(clean.samples);
  const double pn = mean_power(std::span<const double>(noise.samples).first(clean.size()));
  if (pc <= 0.0) throw DataError("mix_at_snr: clean signal has zero power");
  if (pn <= 0.0) throw DataError("mix_at_snr: noise has zero power");
  return std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));
}

inline Waveform mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db) {
  const double g = noise_gain(clean, noise, snr_db);
  Waveform y;
  y.samples.resize(clean.size());
  for (std::size_t n = 0; n < clean.size(); ++n) y.samples[n] = clean.samples[n] + g * noise.samples[n];
  return y;
}

// Whole-utterance SNR of an additive mixture.
inline double measured_snr_db(const Waveform& clean, const Waveform& noisy) {
  if (clean.size() != noisy.size()) throw DataError("measured_snr_db: length mismatch");
  double ps = 0.0, pn = 0.0;
  for (std::size_t n = 0; n < clean.size(); ++n) {
    ps += clean.samples[n] * clean.samples[n];
    const double d = noisy.samples[n] - clean.samples[n];
    pn += d * d;
  }
  return 10.0 * std::log10(ps / pn);
}

}  // namespace wge
