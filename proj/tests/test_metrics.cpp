#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "wge/core/random.hpp"
#include "wge/metrics/metrics.hpp"

using Catch::Approx;
using namespace wge;

namespace {

Waveform white(Rng& rng, std::size_t n, double scale = 1.0) {
  Waveform w;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(scale * rng.normal());
  return w;
}

Waveform ar1(Rng& rng, std::size_t n, double p) {
  Waveform w;
  double prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    prev = p * prev + rng.normal();
    w.samples.push_back(prev);
  }
  return w;
}

// Speech-ish test signal: a few decaying resonances excited by noise.
Waveform resonant(Rng& rng, std::size_t n) {
  Waveform w = white(rng, n, 0.1);
  double y1 = 0, y2 = 0;
  for (auto& v : w.samples) {
    const double y = v + 1.6 * y1 - 0.8 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
  return w;
}

}  // namespace

TEST_CASE("lpc of an AR(1) process recovers the pole", "[lpc]") {
  Rng rng(1);
  const Waveform x = ar1(rng, 200000, 0.9);
  const auto res = lpc(x.samples, 1);
  CHECK(res.a[0] == 1.0);
  CHECK(res.a[1] == Approx(-0.9).margin(0.02));
}

TEST_CASE("lpc of white noise is flat", "[lpc]") {
  Rng rng(2);
  const std::size_t n = 4000;
  const Waveform x = white(rng, n);
  const auto res = lpc(x.samples, 1);
  CHECK(std::abs(res.a[1]) < 3.0 / std::sqrt(double(n)));
}

TEST_CASE("prediction error is non-increasing in order", "[lpc]") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Waveform x = resonant(rng, 400);
    const auto res = lpc(x.samples, 12);
    REQUIRE(res.errors.size() == 13);
    for (std::size_t k = 1; k < res.errors.size(); ++k) {
      REQUIRE(res.errors[k] <= res.errors[k - 1]);
      REQUIRE(res.errors[k] >= 0.0);
    }
  }
}

TEST_CASE("Levinson-Durbin matches a dense normal-equation solve", "[lpc]") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t order = 1 + rng.below(12);
    const Waveform x = resonant(rng, 300 + rng.below(200));
    const auto r = autocorrelation(x.samples, order);
    Eigen::MatrixXd R(order, order);
    Eigen::VectorXd rhs(order);
    for (std::size_t i = 0; i < order; ++i) {
      rhs(i) = -r[i + 1];
      for (std::size_t j = 0; j < order; ++j) R(i, j) = r[i > j ? i - j : j - i];
    }
    const Eigen::VectorXd sol = R.ldlt().solve(rhs);
    const auto res = levinson_durbin(r, order);
    for (std::size_t k = 0; k < order; ++k) REQUIRE(res.a[k + 1] == Approx(sol(k)).margin(1e-8));
  }
}

TEST_CASE("lpc is gain invariant and rejects silence", "[lpc]") {
  Rng rng(5);
  const Waveform x = resonant(rng, 400);
  std::vector<double> scaled(x.samples);
  for (auto& v : scaled) v *= 7.5;
  const auto a = lpc(x.samples, 12);
  const auto b = lpc(scaled, 12);
  for (std::size_t k = 0; k <= 12; ++k) CHECK(b.a[k] == Approx(a.a[k]).margin(1e-10));
  CHECK(b.error == Approx(a.error * 7.5 * 7.5).epsilon(1e-10));
  CHECK_THROWS_AS(lpc(std::vector<double>(100, 0.0), 4), DataError);
  CHECK_THROWS_AS(lpc(std::vector<double>(4, 1.0), 4), ShapeError);
}

TEST_CASE("cepstrum recursion", "[cepstrum]") {
  const std::vector<double> flat{1.0};
  for (double c : lpc_to_cepstrum(flat, 8)) CHECK(c == 0.0);

  const std::vector<double> pole{1.0, -0.9};
  const auto c = lpc_to_cepstrum(pole, 3);
  CHECK(c[0] == Approx(0.9).margin(1e-12));
  CHECK(c[1] == Approx(0.405).margin(1e-12));
  CHECK(c[2] == Approx(0.243).margin(1e-12));
}

TEST_CASE("cepstrum recursion matches the DFT log-spectrum cepstrum", "[cepstrum]") {
  // Cepstrum of 1/A(e^jw): c_m = 2 * IDFT(-ln|A|)[m] for minimum-phase A.
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Waveform x = resonant(rng, 400);
    const auto a = lpc(x.samples, 8).a;  // minimum phase by construction
    const std::size_t n_fft = 4096;
    const std::size_t n_ceps = 20;
    std::vector<double> logmag(n_fft);
    for (std::size_t k = 0; k < n_fft; ++k) {
      std::complex<double> A = 0;
      for (std::size_t i = 0; i < a.size(); ++i)
        A += a[i] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * i) / double(n_fft));
      logmag[k] = -std::log(std::abs(A));
    }
    const auto c = lpc_to_cepstrum(a, n_ceps);
    for (std::size_t m = 1; m <= n_ceps; ++m) {
      double acc = 0;
      for (std::size_t k = 0; k < n_fft; ++k)
        acc += logmag[k] * std::cos(2.0 * std::numbers::pi * double(k * m) / double(n_fft));
      REQUIRE(c[m - 1] == Approx(2.0 * acc / double(n_fft)).margin(1e-3));
    }
  }
}

TEST_CASE("segmental SNR", "[segsnr]") {
  Rng rng(7);
  const Waveform ref = resonant(rng, 16000);
  CHECK(seg_snr(ref, ref) == 35.0);

  Waveform neg = ref;
  for (auto& v : neg.samples) v = -v;
  CHECK(seg_snr(ref, neg) == Approx(10.0 * std::log10(0.25)).margin(1e-9));

  // stationary reference and noise at exactly 10 dB overall
  const Waveform s = white(rng, 32000);
  Waveform n = white(rng, 32000);
  const double g = std::sqrt(mean_power(s.samples) / (mean_power(n.samples) * 10.0));
  Waveform est = s;
  for (std::size_t i = 0; i < est.size(); ++i) est.samples[i] += g * n.samples[i];
  CHECK(seg_snr(s, est) == Approx(10.0).margin(1.0));

  CHECK_THROWS_AS(seg_snr(ref, Waveform(std::vector<double>(10, 0.0))), ShapeError);
  const Waveform silent(std::vector<double>(2000, 0.0));
  CHECK_THROWS_AS(seg_snr(silent, silent), DataError);

  MetricConfig cfg;
  cfg.segsnr_hi = 20.0;
  Waveform close = ref;
  close.samples[100] += 1e-9;
  CHECK(seg_snr(ref, close, cfg) == 20.0);
}

TEST_CASE("segSNR skips silent reference frames", "[segsnr]") {
  Rng rng(8);
  Waveform ref = white(rng, 4096);
  for (std::size_t i = 0; i < 2048; ++i) ref.samples[i] = 0.0;
  Waveform est = ref;
  for (std::size_t i = 0; i < 2048; ++i) est.samples[i] = 1.0;  // error where ref is silent
  CHECK(seg_snr(ref, est) > 20.0);  // only the one straddling frame is penalized
}

TEST_CASE("single-pole cepstral distance closed form", "[cd]") {
  const std::vector<double> ar{1.0, -0.9}, ae{1.0, -0.8};
  double acc = 0;
  for (int m = 1; m <= 12; ++m) {
    const double d = (std::pow(0.9, m) - std::pow(0.8, m)) / m;
    acc += d * d;
  }
  const double expected = 10.0 / std::log(10.0) * std::sqrt(2.0 * acc);
  CHECK(frame_cepstral_distance(ar, ae, 12) == Approx(expected).margin(1e-6));
  CHECK(frame_cepstral_distance(ar, ar, 12) == 0.0);
}

TEST_CASE("LLR and CD are reflexive and gain invariant", "[llr][cd]") {
  Rng rng(9);
  const Waveform ref = resonant(rng, 8000);
  CHECK(llr(ref, ref) == Approx(0.0).margin(1e-12));
  CHECK(cepstral_distance(ref, ref) == Approx(0.0).margin(1e-12));

  Waveform other = ref;
  for (std::size_t i = 0; i < other.size(); ++i) other.samples[i] += 0.3 * rng.normal();
  Waveform scaled = other;
  for (auto& v : scaled.samples) v *= 3.0;
  CHECK(llr(ref, scaled) == Approx(llr(ref, other)).epsilon(1e-9));
  CHECK(cepstral_distance(ref, scaled) == Approx(cepstral_distance(ref, other)).epsilon(1e-9));
  CHECK(cepstral_distance(ref, other) > 0.0);
  CHECK(cepstral_distance(ref, other) <= 10.0);
}

TEST_CASE("LLR of AR(1) against white noise is positive", "[llr]") {
  Rng rng(10);
  const Waveform ref = ar1(rng, 16000, 0.9);
  Waveform est = white(rng, 16000);
  const double g = std::sqrt(mean_power(ref.samples) / mean_power(est.samples));
  for (auto& v : est.samples) v *= g;
  CHECK(llr(ref, est) > 0.1);
}

TEST_CASE("silent estimate frames use the flat predictor", "[llr][cd]") {
  Rng rng(11);
  const Waveform ref = ar1(rng, 4000, 0.9);
  const Waveform zero(std::vector<double>(4000, 0.0));
  const double cd = cepstral_distance(ref, zero);
  CHECK(std::isfinite(cd));
  CHECK(cd > 0.0);
  CHECK(std::isfinite(llr(ref, zero)));
}

TEST_CASE("corpus evaluation", "[corpus]") {
  Rng rng(12);
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 3; ++i) {
    Waveform r = resonant(rng, 6000);
    Waveform e = r;
    for (auto& v : e.samples) v += 0.05 * rng.normal();
    pairs.push_back({"u" + std::to_string(i), r, e});
  }
  const auto rep = evaluate_corpus(pairs);
  REQUIRE(rep.utterances.size() == 3);
  CHECK(rep.failures == 0);
  double s = 0;
  for (const auto& u : rep.utterances) s += u.segsnr_db;
  CHECK(rep.mean_segsnr_db == Approx(s / 3).epsilon(1e-12));

  std::vector<EvalPair> reversed(pairs.rbegin(), pairs.rend());
  const auto rep2 = evaluate_corpus(reversed);
  CHECK(rep2.mean_segsnr_db == Approx(rep.mean_segsnr_db).epsilon(1e-12));
  CHECK(rep2.mean_cd_db == Approx(rep.mean_cd_db).epsilon(1e-12));
  CHECK(rep2.mean_llr == Approx(rep.mean_llr).epsilon(1e-12));

  const auto single = evaluate_corpus(std::span(pairs).first(1));
  CHECK(single.mean_cd_db == rep.utterances[0].cd_db);

  std::vector<EvalPair> same{{"a", pairs[0].ref, pairs[0].ref}};
  const auto id = evaluate_corpus(same);
  CHECK(id.mean_segsnr_db == 35.0);
  CHECK(id.mean_cd_db == Approx(0.0).margin(1e-12));
  CHECK(id.mean_llr == Approx(0.0).margin(1e-12));

  pairs.push_back({"bad", Waveform(std::vector<double>(100, 0.0)), Waveform(std::vector<double>(100, 0.0))});
  const auto with_bad = evaluate_corpus(pairs);
  CHECK(with_bad.failures == 1);
  CHECK_FALSE(with_bad.utterances.back().ok);
  CHECK(with_bad.mean_segsnr_db == Approx(rep.mean_segsnr_db).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate_corpus(std::span<const EvalPair>{}), DataError);
}
