#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "wge/io/synth.hpp"
#include "wge/train/trainer.hpp"

using Catch::Approx;
using namespace wge;

namespace {

Tensor scores(std::vector<float> v) {
  const Shape s{v.size(), 1, 1};
  return Tensor(s, std::move(v));
}

TrainConfig toy_config() {
  TrainConfig c;
  c.model.feature_maps = {4, 8};
  c.model.filter_width = 9;
  c.model.input_length = 64;
  c.batch_size = 2;
  c.epochs = 2;
  c.seed = 5;
  return c;
}

TrainBatch toy_batch(Rng& rng, std::size_t b, std::size_t L) {
  TrainBatch batch{Tensor(Shape{b, L, 1}), Tensor(Shape{b, L, 1}), {}};
  for (std::size_t i = 0; i < batch.x.size(); ++i) {
    batch.x[i] = static_cast<float>(0.3 * std::sin(0.2 * double(i)));
    batch.y[i] = batch.x[i] + static_cast<float>(0.1 * rng.normal());
  }
  return batch;
}

std::vector<Utterance> toy_utterances(std::size_t n, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Utterance> u;
  for (std::size_t k = 0; k < n; ++k) {
    Utterance utt{"u" + std::to_string(k), {}, {}};
    for (std::size_t i = 0; i < len; ++i) {
      const double c = 0.2 * std::sin(0.05 * double(i) * (k + 1));
      utt.clean.samples.push_back(c);
      utt.noisy.samples.push_back(c + 0.05 * rng.normal());
    }
    u.push_back(std::move(utt));
  }
  return u;
}

bool same_params(const std::vector<Parameter>& a, const std::vector<Parameter>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i].value == b[i].value)) return false;
  return true;
}

}  // namespace

TEST_CASE("discriminator loss values", "[loss]") {
  const auto l0 = d_loss(scores({0.9f, 0.9f}), scores({0.0f, 0.0f}), 0.9);
  CHECK(l0.total() == 0.0);
  const auto l1 = d_loss(scores({0.5f}), scores({0.5f}), 1.0);
  CHECK(l1.real == Approx(0.125));
  CHECK(l1.fake == Approx(0.125));
  CHECK(l1.total() == Approx(0.25));
  CHECK_THROWS_AS(d_loss(Tensor{}, scores({0.0f}), 1.0), ShapeError);
}

TEST_CASE("generator loss values", "[loss]") {
  const Tensor x(Shape{1, 4, 1}, std::vector<float>{0.1f, -0.2f, 0.3f, 0.0f});
  CHECK(g_loss(scores({1.0f}), x, x, 100.0).total == 0.0);
  const auto a = g_loss(scores({0.0f}), x, x, 100.0);
  CHECK(a.total == 1.0);
  CHECK(a.adv == 1.0);
  CHECK(a.l1 == 0.0);

  Tensor xh = x;
  for (auto& v : xh.values()) v += 0.01f;
  const auto b = g_loss(scores({1.0f}), xh, x, 100.0);
  CHECK(b.l1 == Approx(0.01).margin(1e-7));
  CHECK(b.total == Approx(1.0).margin(1e-5));
  CHECK(b.total == Approx(b.adv + 100.0 * b.l1).margin(1e-12));
  CHECK_THROWS_AS(g_loss(scores({1.0f}), Tensor(Shape{1, 3, 1}), x, 1.0), ShapeError);
}

TEST_CASE("discriminator objective is minimized at the smoothing target", "[loss]") {
  for (const double s : {0.9, 1.0}) {
    double best_c = 0, best = 1e9;
    for (int k = 0; k <= 2000; ++k) {
      const double c = k * 1e-3;
      const double v = d_loss(scores({float(c), float(c)}), scores({0.0f, 0.0f}), s).total();
      if (v < best) {
        best = v;
        best_c = c;
      }
    }
    CHECK(best_c == Approx(s).margin(1e-3));
  }
  TrainConfig c;
  CHECK(c.smoothing_target() == 0.9);
  c.model.flags.label_smoothing = false;
  CHECK(c.smoothing_target() == 1.0);
}

TEST_CASE("loss gradients match finite differences", "[loss]") {
  Rng rng(1);
  Tensor r(Shape{3, 1, 1}), f(Shape{3, 1, 1});
  for (auto& v : r.values()) v = float(rng.normal());
  for (auto& v : f.values()) v = float(rng.normal());
  const float h = 1e-2f;
  for (std::size_t i = 0; i < 3; ++i) {
    Tensor up = r, dn = r;
    up[i] += h;
    dn[i] -= h;
    CHECK(d_loss_real_grad(r, 0.9)[i] == Approx((d_loss_real(up, 0.9) - d_loss_real(dn, 0.9)) / (2 * h)).epsilon(1e-3));
    up = f;
    dn = f;
    up[i] += h;
    dn[i] -= h;
    CHECK(d_loss_fake_grad(f)[i] == Approx((d_loss_fake(up) - d_loss_fake(dn)) / (2 * h)).epsilon(1e-3));
    const Tensor x(Shape{3, 1, 1});
    CHECK(g_loss_adv_grad(f)[i] ==
          Approx((g_loss(up, x, x, 0).adv - g_loss(dn, x, x, 0).adv) / (2 * h)).epsilon(1e-3));
  }
}

TEST_CASE("train step reports non-negative components and is deterministic", "[train]") {
  const TrainConfig cfg = toy_config();
  Trainer a(cfg), b(cfg);
  Rng rng(3);
  const TrainBatch batch = toy_batch(rng, 2, 64);
  for (int k = 0; k < 5; ++k) {
    const auto ra = a.train_step(batch);
    const auto rb = b.train_step(batch);
    CHECK(ra.d_loss_real >= 0.0);
    CHECK(ra.d_loss_fake >= 0.0);
    CHECK(ra.g_adv_loss >= 0.0);
    CHECK(ra.g_l1_loss >= 0.0);
    CHECK(ra.step == std::uint64_t(k));
    CHECK(ra.d_loss_real == rb.d_loss_real);
    CHECK(ra.g_l1_loss == rb.g_l1_loss);
  }
  CHECK(same_params(a.generator().parameters(), b.generator().parameters()));
  CHECK(same_params(a.discriminator().parameters(), b.discriminator().parameters()));
  CHECK(a.latent_rng() == b.latent_rng());
}

TEST_CASE("the generator update leaves the discriminator alone", "[train]") {
  // Replays train_step by hand: snapshot D after its update, then check the
  // G update did not move it, and vice versa.
  TrainConfig cfg = toy_config();
  Trainer t(cfg);
  Rng rng(4);
  const TrainBatch batch = toy_batch(rng, 2, 64);
  const auto g0 = t.generator().parameters();
  const auto d0 = t.discriminator().parameters();
  t.train_step(batch);
  const auto d1 = t.discriminator().parameters();
  CHECK_FALSE(same_params(d0, d1));
  CHECK_FALSE(same_params(g0, t.generator().parameters()));

  // rerun the D half only with a fresh trainer and compare
  TrainConfig only_d = cfg;
  Trainer u(only_d);
  Tensor z = sample_latent(u.latent_rng(), 2, u.generator().latent_length(), u.generator().latent_channels());
  const Tensor xh = u.generator().forward(batch.y, &z);
  zero_grads(std::span(u.discriminator().parameters()));
  DiscriminatorTrace tr;
  const Tensor s = u.discriminator().forward(concat_batch(batch.x, xh), concat_batch(batch.y, batch.y), &tr);
  const double st = cfg.smoothing_target();
  u.discriminator().backward(
      tr, concat_batch(d_loss_real_grad(slice_batch(s, 0, 2), st), d_loss_fake_grad(slice_batch(s, 2, 2))));
  u.d_optimizer().step(std::span(u.discriminator().parameters()));
  // D after the full step equals D after its own update: G's step did not touch it
  CHECK(same_params(u.discriminator().parameters(), d1));
}

TEST_CASE("tiny learning rate leaves the losses continuous", "[train]") {
  TrainConfig cfg = toy_config();
  cfg.lr = 1e-9;
  Trainer t(cfg);
  Rng rng(5);
  const TrainBatch batch = toy_batch(rng, 2, 64);
  const Tensor z(Shape{2, t.generator().latent_length(), t.generator().latent_channels()}, 0.5f);
  auto losses = [&] {
    const Tensor xh = t.generator().forward(batch.y, &z);
    const auto dl = d_loss(t.discriminator().forward(batch.x, batch.y), t.discriminator().forward(xh, batch.y), 0.9);
    return dl.total();
  };
  const double before = losses();
  t.train_step(batch);
  CHECK(std::abs(losses() - before) < 1e-6);
}

TEST_CASE("two-step discriminator switch", "[train]") {
  TrainConfig cfg = toy_config();
  cfg.d_two_steps = true;
  Trainer t(cfg);
  Rng rng(6);
  const auto r = t.train_step(toy_batch(rng, 2, 64));
  CHECK(t.d_optimizer().steps() == 2);
  CHECK(t.g_optimizer().steps() == 1);
  CHECK(std::isfinite(r.d_loss_real + r.d_loss_fake));
}

TEST_CASE("L1 term drives a one-sample toy problem down", "[train]") {
  TrainConfig cfg = toy_config();
  cfg.lambda_l1 = 1000.0;
  cfg.lr = 1e-3;
  Trainer t(cfg);
  Rng rng(7);
  const TrainBatch batch = toy_batch(rng, 1, 64);
  std::vector<double> l1;
  for (int k = 0; k < 50; ++k) l1.push_back(t.train_step(batch).g_l1_loss);
  // smoothed trend: 10-step window means never increase
  std::vector<double> smooth;
  for (std::size_t k = 0; k + 10 <= l1.size(); k += 10)
    smooth.push_back(std::accumulate(l1.begin() + k, l1.begin() + k + 10, 0.0) / 10.0);
  for (std::size_t k = 1; k < smooth.size(); ++k) CHECK(smooth[k] <= smooth[k - 1]);
  CHECK(smooth.back() < 0.5 * smooth.front());
}

TEST_CASE("instability is detected and reported", "[train]") {
  TrainConfig cfg = toy_config();
  cfg.score_limit = 1e-12;  // every score counts as exploding
  cfg.score_patience = 3;
  Trainer t(cfg);
  Rng rng(8);
  const TrainBatch batch = toy_batch(rng, 2, 64);
  t.train_step(batch);
  t.train_step(batch);
  try {
    t.train_step(batch);
    FAIL("expected an instability abort");
  } catch (const InstabilityError& e) {
    CHECK(e.step() == 2);
    CHECK(e.epoch() == 1);
  }

  Trainer nan_t(toy_config());
  TrainBatch bad = batch;
  bad.x[0] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(nan_t.train_step(bad), InstabilityError);
}

TEST_CASE("epoch loop: zero epochs, history length, abort record", "[train]") {
  const auto utts = toy_utterances(3, 200, 9);
  TrainConfig cfg = toy_config();
  const auto data = build_frame_dataset(std::span(utts).first(2), cfg.model);
  CHECK(data.size() == 2 * frame_count(200, 64));

  cfg.epochs = 0;
  Trainer zero(cfg);
  const Trainer fresh(cfg);
  const auto out0 = train_epochs(zero, data, std::span(utts).last(1));
  CHECK_FALSE(out0.aborted);
  CHECK(zero.history.empty());
  CHECK(same_params(zero.generator().parameters(), fresh.generator().parameters()));

  cfg.epochs = 3;
  Trainer t(cfg);
  int calls = 0;
  const auto out = train_epochs(t, data, std::span(utts).last(1), [&](const Trainer&) { ++calls; });
  CHECK_FALSE(out.aborted);
  CHECK(t.history.size() == 3);
  CHECK(calls == 3);
  CHECK(t.epochs_done == 3);
  for (const auto& row : t.history) {
    CHECK(std::isfinite(row.heldout_l1));
    CHECK(std::isfinite(row.heldout_segsnr));
  }
  CHECK(t.steps_done == 3 * ((data.size() + 1) / 2));

  cfg.score_limit = 1e-12;
  cfg.score_patience = 3;
  Trainer u(cfg);
  const auto bad = train_epochs(u, data, {});
  CHECK(bad.aborted);
  CHECK(bad.abort_epoch == 1);
  CHECK(bad.abort_step == cfg.score_patience - 1);
  CHECK(u.history.size() == 1);
}

TEST_CASE("resuming the epoch loop matches a straight run", "[train]") {
  const auto utts = toy_utterances(3, 300, 10);
  TrainConfig cfg = toy_config();
  cfg.epochs = 4;
  const auto data = build_frame_dataset(std::span(utts).first(2), cfg.model);
  Trainer straight(cfg);
  train_epochs(straight, data, std::span(utts).last(1));

  // stop after 2 epochs, then continue the same object with the target raised
  TrainConfig half = cfg;
  half.epochs = 2;
  Trainer resumed(half);
  train_epochs(resumed, data, std::span(utts).last(1));
  Trainer cont(cfg);
  cont.generator() = resumed.generator();
  cont.discriminator() = resumed.discriminator();
  cont.g_optimizer() = resumed.g_optimizer();
  cont.d_optimizer() = resumed.d_optimizer();
  cont.latent_rng() = resumed.latent_rng();
  cont.shuffle_rng() = resumed.shuffle_rng();
  cont.epochs_done = resumed.epochs_done;
  cont.steps_done = resumed.steps_done;
  cont.history = resumed.history;
  train_epochs(cont, data, std::span(utts).last(1));
  CHECK(same_params(cont.generator().parameters(), straight.generator().parameters()));
  CHECK(same_params(cont.discriminator().parameters(), straight.discriminator().parameters()));
  REQUIRE(cont.history.size() == 4);
  CHECK(cont.history.back().heldout_l1 == straight.history.back().heldout_l1);
}

TEST_CASE("enhance preserves length and is seeded", "[enhance]") {
  TrainConfig cfg = toy_config();
  const Generator g = Generator::build(cfg.model, 1);
  Rng rng(11);
  for (std::size_t n : {std::size_t{1}, std::size_t{63}, std::size_t{64}, std::size_t{65}, std::size_t{500}}) {
    Waveform y;
    for (std::size_t i = 0; i < n; ++i) y.samples.push_back(0.1 * rng.normal());
    const Waveform a = enhance_utterance(g, y, 42);
    CHECK(a.size() == n);
    CHECK(enhance_utterance(g, y, 42, 1) == a);
  }
  CHECK_THROWS_AS(enhance_utterance(g, Waveform{}, 1), DataError);
}

TEST_CASE("enhance with an identity generator returns the input", "[enhance]") {
  // Layer 0 copies even/odd samples into channels 0/1 (PReLU slope 1); the
  // last decoder interleaves those skip channels back.
  {
    ModelConfig mc = ModelConfig::desk();
    Generator g = Generator::build(mc, 3);
    auto& k0 = g.parameter("g.enc.0.kernel").value;
    k0.fill(0.0f);
    k0(14, 0, 0) = 1.0f;
    k0(15, 0, 1) = 1.0f;
    g.parameter("g.enc.0.prelu").value.fill(1.0f);
    auto& kl = g.parameter("g.dec.3.kernel").value;
    kl.fill(0.0f);
    const std::size_t skip = mc.feature_maps[0];
    kl(14, 0, skip + 0) = 1.0f;
    kl(15, 0, skip + 1) = 1.0f;

    Rng rng(12);
    for (std::size_t n : {std::size_t{700}, std::size_t{1024}, std::size_t{3000}}) {
      Waveform y;
      for (std::size_t i = 0; i < n; ++i) y.samples.push_back(0.3 * rng.uniform(-1, 1));
      const Waveform out = enhance_utterance(g, y, 5);
      REQUIRE(out.size() == n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(out.samples[i] == Approx(y.samples[i]).margin(1e-5));
    }
  }
}

TEST_CASE("synthetic corpus mixes at the recorded SNR", "[synth]") {
  for (std::size_t i = 0; i < 6; ++i) {
    const auto u = synth_utterance(3, i, 2.0);
    CHECK(u.clean.size() == 32000);
    CHECK(u.noise.size() == 32000 + 4000);
    CHECK(u.snr_db == kSnrGrid[i % 4]);
    const Waveform noisy = mix_recipe(u.clean, u.noise, u.snr_db, u.mix_seed);
    CHECK(measured_snr_db(u.clean, noisy) == Approx(u.snr_db).margin(1e-6));
  }
  CHECK(synth_utterance(3, 2, 2.0).clean == synth_utterance(3, 2, 2.0).clean);
  CHECK_THROWS_AS(synth_utterance(3, 0, 1.5), ConfigError);
}
