#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "wge/core/error.hpp"
#include "wge/core/random.hpp"
#include "wge/dsp/mix.hpp"
#include "wge/dsp/waveform.hpp"

namespace wge {

enum class NoiseKind { White, Pink, Babble };

inline const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::White: return "white";
    case NoiseKind::Pink: return "pink";
    case NoiseKind::Babble: return "babble";
  }
  return "?";
}

inline constexpr std::array<double, 4> kSnrGrid{0.0, 5.0, 10.0, 15.0};

namespace detail {

// Two-pole resonator, unity gain at DC-ish scale; coefficients updated per sample.
struct Resonator {
  double y1 = 0.0, y2 = 0.0;
  double step(double x, double freq, double bw) {
    const double r = std::exp(-std::numbers::pi * bw / kSampleRate);
    const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / kSampleRate);
    const double a2 = -r * r;
    const double y = (1.0 - r) * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

inline void normalize_rms(std::vector<double>& x, double rms) {
  const double p = mean_power(x);
  if (p <= 0.0) return;
  const double g = rms / std::sqrt(p);
  for (auto& v : x) v *= g;
}

// Harmonic source through three formant resonators. `voicing` in [0, 1]
// blends in aspiration noise.
inline std::vector<double> voiced_stream(Rng& rng, std::size_t n, double f0_base, double syll_rate,
                                         double voicing) {
  struct Syllable {
    std::size_t start, len;
    double f1, f2, f3, peak;
  };
  std::vector<Syllable> sylls;
  for (std::size_t pos = static_cast<std::size_t>(rng.uniform(0.0, 0.1) * kSampleRate); pos < n;) {
    const double dur = rng.uniform(0.6, 1.4) / syll_rate;
    Syllable s{pos, static_cast<std::size_t>(dur * kSampleRate), rng.uniform(300, 800), rng.uniform(900, 2200),
               rng.uniform(2400, 3300), rng.uniform(0.5, 1.0)};
    sylls.push_back(s);
    pos += s.len + static_cast<std::size_t>(rng.uniform(0.02, 0.12) * kSampleRate);
  }
  std::vector<double> out(n, 0.0);
  Resonator r1, r2, r3;
  double phase = 0.0;
  const double drift_rate = rng.uniform(0.3, 1.2);
  const double drift_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::size_t k = 0;
  double f1 = 500, f2 = 1500, f3 = 2800;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    const double f0 = f0_base * (1.0 + 0.15 * std::sin(2.0 * std::numbers::pi * drift_rate * t + drift_phase));
    phase += 2.0 * std::numbers::pi * f0 / kSampleRate;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
    double src = 0.0;
    const int n_harm = static_cast<int>(4000.0 / f0);
    for (int h = 1; h <= n_harm; ++h) src += std::sin(h * phase) / h;
    src = voicing * src + (1.0 - voicing) * rng.normal();

    while (k < sylls.size() && i >= sylls[k].start + sylls[k].len) ++k;
    double env = 0.0;
    if (k < sylls.size() && i >= sylls[k].start) {
      const auto& s = sylls[k];
      const double u = static_cast<double>(i - s.start) / static_cast<double>(s.len);
      env = s.peak * std::pow(std::sin(std::numbers::pi * u), 2.0);
      // formants glide toward the syllable's targets
      f1 += 0.002 * (s.f1 - f1);
      f2 += 0.002 * (s.f2 - f2);
      f3 += 0.002 * (s.f3 - f3);
    }
    const double y = r1.step(src, f1, 80) * 1.0 + r2.step(src, f2, 120) * 0.6 + r3.step(src, f3, 180) * 0.3;
    out[i] = env * y;
  }
  return out;
}

}  // namespace detail

// Speech-like clean signal: pitch-drifting harmonics, gliding formants,
// syllable-rate (~4 Hz) amplitude envelope. RMS about 0.1.
inline Waveform synth_speech(Rng& rng, std::size_t n) {
  auto x = detail::voiced_stream(rng, n, rng.uniform(95.0, 230.0), rng.uniform(3.0, 5.0), 0.97);
  detail::normalize_rms(x, 0.1);
  return Waveform(std::move(x));
}

inline Waveform synth_noise(Rng& rng, NoiseKind kind, std::size_t n) {
  std::vector<double> x(n, 0.0);
  switch (kind) {
    case NoiseKind::White:
      for (auto& v : x) v = rng.normal();
      break;
    case NoiseKind::Pink: {
      // Kellet's economy filter
      double b0 = 0, b1 = 0, b2 = 0;
      for (auto& v : x) {
        const double w = rng.normal();
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        v = b0 + b1 + b2 + w * 0.1848;
      }
      break;
    }
    case NoiseKind::Babble:
      for (int talker = 0; talker < 5; ++talker) {
        const auto s = detail::voiced_stream(rng, n, rng.uniform(90.0, 250.0), rng.uniform(3.0, 6.0), 0.8);
        for (std::size_t i = 0; i < n; ++i) x[i] += s[i];
      }
      break;
  }
  detail::normalize_rms(x, 0.1);
  return Waveform(std::move(x));
}

struct SynthUtterance {
  Waveform clean;
  Waveform noise;  // 0.25 s longer than clean
  NoiseKind kind = NoiseKind::White;
  double snr_db = 0.0;
  std::uint64_t mix_seed = 0;
};

// Utterance `index` of a corpus: noise kind cycles white/pink/babble, SNR
// cycles through the grid.
inline SynthUtterance synth_utterance(std::uint64_t seed, std::size_t index, double duration_s) {
  if (!(duration_s >= 2.0)) throw ConfigError("synthetic utterances must be at least 2 s long");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * kSampleRate));
  SynthUtterance u;
  Rng speech_rng(sub_seed(sub_seed(seed, "speech"), index));
  Rng noise_rng(sub_seed(sub_seed(seed, "noise"), index));
  u.clean = synth_speech(speech_rng, n);
  u.kind = static_cast<NoiseKind>(index % 3);
  u.noise = synth_noise(noise_rng, u.kind, n + kSampleRate / 4);
  u.snr_db = kSnrGrid[index % kSnrGrid.size()];
  u.mix_seed = sub_seed(sub_seed(seed, "mix"), index);
  return u;
}

// Picks the noise excerpt from the per-entry seed and mixes at snr_db.
inline Waveform mix_recipe(const Waveform& clean, const Waveform& noise, double snr_db, std::uint64_t mix_seed) {
  if (noise.size() < clean.size()) {
    throw DataError("noise recording (" + std::to_string(noise.size()) + " samples) is shorter than clean (" +
                    std::to_string(clean.size()) + ")");
  }
  Rng rng(mix_seed);
  const std::size_t offset = rng.below(noise.size() - clean.size() + 1);
  Waveform seg(std::vector<double>(noise.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                                   noise.samples.begin() + static_cast<std::ptrdiff_t>(offset + clean.size())));
  return mix_at_snr(clean, seg, snr_db);
}

}  // namespace wge
