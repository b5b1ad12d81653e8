#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "wge/core/error.hpp"
#include "wge/dsp/waveform.hpp"
#include "wge/metrics/lpc.hpp"

namespace wge {

enum class Window { Rectangular, Hann };

struct FrameSpec {
  std::size_t frame_len = 512;
  std::size_t hop = 256;
  Window window = Window::Rectangular;

  void validate() const {
    if (frame_len == 0 || hop == 0 || hop > frame_len) {
      throw ConfigError("frame spec needs 0 < hop <= frame_len (got " + std::to_string(hop) + ", " +
                        std::to_string(frame_len) + ")");
    }
  }
};

struct MetricConfig {
  FrameSpec segsnr_frames{512, 256, Window::Rectangular};
  double segsnr_lo = -10.0;
  double segsnr_hi = 35.0;
  FrameSpec lpc_frames{400, 160, Window::Hann};  // 25 ms / 10 ms
  std::size_t lpc_order = 12;
  std::size_t n_ceps = 12;
  double cd_hi = 10.0;
  double energy_floor = 1e-10;
};

namespace detail {

inline void require_same_length(const Waveform& ref, const Waveform& est, const char* what) {
  if (ref.size() != est.size()) {
    throw ShapeError(std::string(what) + ": reference has " + std::to_string(ref.size()) +
                     " samples, estimate has " + std::to_string(est.size()));
  }
  if (ref.empty()) throw DataError(std::string(what) + ": empty signal");
}

// Frame start offsets; a signal shorter than one frame gets one zero-padded frame.
inline std::vector<std::size_t> frame_starts(std::size_t n, const FrameSpec& spec) {
  spec.validate();
  std::vector<std::size_t> starts;
  if (n <= spec.frame_len) return {0};
  for (std::size_t s = 0; s + spec.frame_len <= n; s += spec.hop) starts.push_back(s);
  return starts;
}

inline std::vector<double> window(const FrameSpec& spec) {
  std::vector<double> w(spec.frame_len, 1.0);
  if (spec.window == Window::Hann) {
    // periodic Hann
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(w.size()));
  }
  return w;
}

inline std::vector<double> cut(const Waveform& x, std::size_t start, const std::vector<double>& win) {
  std::vector<double> f(win.size(), 0.0);
  for (std::size_t i = 0; i < win.size() && start + i < x.size(); ++i) f[i] = x.samples[start + i] * win[i];
  return f;
}

inline double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace detail

inline double seg_snr(const Waveform& ref, const Waveform& est, const MetricConfig& cfg = {}) {
  detail::require_same_length(ref, est, "seg_snr");
  const auto win = detail::window(cfg.segsnr_frames);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t s : detail::frame_starts(ref.size(), cfg.segsnr_frames)) {
    const auto r = detail::cut(ref, s, win);
    const auto e = detail::cut(est, s, win);
    const double pr = detail::energy(r);
    if (pr < cfg.energy_floor) continue;
    double pn = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) pn += (r[i] - e[i]) * (r[i] - e[i]);
    const double snr = pn > 0.0 ? 10.0 * std::log10(pr / pn) : cfg.segsnr_hi;
    sum += std::clamp(snr, cfg.segsnr_lo, cfg.segsnr_hi);
    ++used;
  }
  if (used == 0) throw DataError("seg_snr: reference is silent");
  return sum / static_cast<double>(used);
}

// Per-frame quantities on LPC polynomials (exposed for closed-form checks).
inline double frame_llr(std::span<const double> a_ref, std::span<const double> a_est, std::span<const double> r_ref) {
  const double num = toeplitz_quadratic(a_est, r_ref);
  const double den = toeplitz_quadratic(a_ref, r_ref);
  return std::max(0.0, std::log(num / den));
}

inline double frame_cepstral_distance(std::span<const double> a_ref, std::span<const double> a_est,
                                      std::size_t n_ceps) {
  const auto cr = lpc_to_cepstrum(a_ref, n_ceps);
  const auto ce = lpc_to_cepstrum(a_est, n_ceps);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_ceps; ++i) acc += (cr[i] - ce[i]) * (cr[i] - ce[i]);
  return 10.0 / std::numbers::ln10 * std::sqrt(2.0 * acc);
}

namespace detail {

// Walks LPC frames with enough reference energy; an all-zero estimate frame
// gets the flat predictor A(z) = 1.
template <typename F>
std::size_t for_lpc_frames(const Waveform& ref, const Waveform& est, const MetricConfig& cfg, F&& fn) {
  const auto win = window(cfg.lpc_frames);
  if (cfg.lpc_frames.frame_len <= cfg.lpc_order) throw ConfigError("LPC frames must be longer than the order");
  std::size_t used = 0;
  for (std::size_t s : frame_starts(ref.size(), cfg.lpc_frames)) {
    const auto r = cut(ref, s, win);
    if (energy(r) < cfg.energy_floor) continue;
    const auto e = cut(est, s, win);
    const auto rr = autocorrelation(r, cfg.lpc_order);
    const auto ar = levinson_durbin(rr, cfg.lpc_order).a;
    std::vector<double> ae(cfg.lpc_order + 1, 0.0);
    ae[0] = 1.0;
    if (energy(e) > 0.0) ae = lpc(e, cfg.lpc_order).a;
    fn(ar, ae, rr);
    ++used;
  }
  return used;
}

}  // namespace detail

inline double llr(const Waveform& ref, const Waveform& est, const MetricConfig& cfg = {}) {
  detail::require_same_length(ref, est, "llr");
  double sum = 0.0;
  const std::size_t used = detail::for_lpc_frames(ref, est, cfg, [&](const auto& ar, const auto& ae, const auto& rr) {
    sum += frame_llr(ar, ae, rr);
  });
  if (used == 0) throw DataError("llr: reference is silent");
  return sum / static_cast<double>(used);
}

inline double cepstral_distance(const Waveform& ref, const Waveform& est, const MetricConfig& cfg = {}) {
  detail::require_same_length(ref, est, "cepstral_distance");
  double sum = 0.0;
  const std::size_t used = detail::for_lpc_frames(ref, est, cfg, [&](const auto& ar, const auto& ae, const auto&) {
    sum += std::clamp(frame_cepstral_distance(ar, ae, cfg.n_ceps), 0.0, cfg.cd_hi);
  });
  if (used == 0) throw DataError("cepstral_distance: reference is silent");
  return sum / static_cast<double>(used);
}

struct UtteranceMetrics {
  std::string id;
  double segsnr_db = 0.0;
  double cd_db = 0.0;
  double llr = 0.0;
  bool ok = true;
  std::string error;
};

struct MetricReport {
  std::vector<UtteranceMetrics> utterances;
  double mean_segsnr_db = 0.0;
  double mean_cd_db = 0.0;
  double mean_llr = 0.0;
  std::size_t failures = 0;
};

struct EvalPair {
  std::string id;
  Waveform ref;
  Waveform est;
};

inline UtteranceMetrics evaluate_pair(const EvalPair& p, const MetricConfig& cfg = {}) {
  UtteranceMetrics m;
  m.id = p.id;
  try {
    m.segsnr_db = seg_snr(p.ref, p.est, cfg);
    m.cd_db = cepstral_distance(p.ref, p.est, cfg);
    m.llr = llr(p.ref, p.est, cfg);
  } catch (const Error& e) {
    m.ok = false;
    m.error = e.what();
  }
  return m;
}

// Means over the utterances that evaluated cleanly, in list order.
inline MetricReport summarize(std::vector<UtteranceMetrics> rows) {
  MetricReport rep;
  rep.utterances = std::move(rows);
  std::size_t n = 0;
  for (const auto& u : rep.utterances) {
    if (!u.ok) {
      ++rep.failures;
      continue;
    }
    rep.mean_segsnr_db += u.segsnr_db;
    rep.mean_cd_db += u.cd_db;
    rep.mean_llr += u.llr;
    ++n;
  }
  if (n > 0) {
    rep.mean_segsnr_db /= static_cast<double>(n);
    rep.mean_cd_db /= static_cast<double>(n);
    rep.mean_llr /= static_cast<double>(n);
  }
  return rep;
}

inline MetricReport evaluate_corpus(std::span<const EvalPair> pairs, const MetricConfig& cfg = {}) {
  if (pairs.empty()) throw DataError("evaluate_corpus: no pairs");
  std::vector<UtteranceMetrics> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(evaluate_pair(p, cfg));
  return summarize(std::move(rows));
}

}  // namespace wge
