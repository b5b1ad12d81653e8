#pragma once

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wge/core/adam.hpp"
#include "wge/core/layers.hpp"
#include "wge/core/random.hpp"
#include "wge/metrics/metrics.hpp"
#include "wge/model/discriminator.hpp"
#include "wge/model/generator.hpp"
#include "wge/model/latent.hpp"
#include "wge/train/config.hpp"
#include "wge/train/dataset.hpp"
#include "wge/train/enhance.hpp"
#include "wge/train/losses.hpp"

namespace wge {

struct StepReport {
  double d_loss_real = 0.0;
  double d_loss_fake = 0.0;
  double g_adv_loss = 0.0;
  double g_l1_loss = 0.0;
  std::uint64_t step = 0;
};

struct HistoryRow {
  std::size_t epoch = 0;  // 1-based
  double d_loss_real = 0.0;
  double d_loss_fake = 0.0;
  double g_adv = 0.0;
  double g_l1 = 0.0;
  double heldout_l1 = std::numeric_limits<double>::quiet_NaN();
  double heldout_segsnr = std::numeric_limits<double>::quiet_NaN();

  friend bool operator==(const HistoryRow&, const HistoryRow&) = default;
};

// x: target, y: D condition, y_in: generator input (empty means y).
struct TrainBatch {
  Tensor x;
  Tensor y;
  Tensor y_in;
};

// Named sub-seeds of the run seed.
struct RunSeeds {
  std::uint64_t init_g, init_d, latent, shuffle, heldout_latent;
  explicit RunSeeds(std::uint64_t seed)
      : init_g(sub_seed(seed, "init-G")),
        init_d(sub_seed(seed, "init-D")),
        latent(sub_seed(seed, "latent")),
        shuffle(sub_seed(seed, "shuffle")),
        heldout_latent(sub_seed(seed, "heldout-latent")) {}
};

class Trainer {
 public:
  explicit Trainer(TrainConfig config)
      : config_((config.validate(), std::move(config))),
        g_(Generator::build(config_.model, RunSeeds(config_.seed).init_g)),
        d_(Discriminator::build(config_.model, RunSeeds(config_.seed).init_d)),
        g_opt_(config_.adam()),
        d_opt_(config_.adam()),
        latent_rng_(RunSeeds(config_.seed).latent),
        shuffle_rng_(RunSeeds(config_.seed).shuffle) {}

  const TrainConfig& config() const noexcept { return config_; }
  Generator& generator() noexcept { return g_; }
  const Generator& generator() const noexcept { return g_; }
  Discriminator& discriminator() noexcept { return d_; }
  const Discriminator& discriminator() const noexcept { return d_; }
  Adam& g_optimizer() noexcept { return g_opt_; }
  Adam& d_optimizer() noexcept { return d_opt_; }
  const Adam& g_optimizer() const noexcept { return g_opt_; }
  const Adam& d_optimizer() const noexcept { return d_opt_; }
  Rng& latent_rng() noexcept { return latent_rng_; }
  Rng& shuffle_rng() noexcept { return shuffle_rng_; }
  const Rng& latent_rng() const noexcept { return latent_rng_; }
  const Rng& shuffle_rng() const noexcept { return shuffle_rng_; }

  // Moves the epoch target, e.g. to continue a finished run for longer.
  void set_epochs(std::size_t epochs) noexcept { config_.epochs = epochs; }

  std::size_t epochs_done = 0;
  std::uint64_t steps_done = 0;
  std::size_t unstable_streak = 0;
  std::vector<HistoryRow> history;

  // One discriminator update on the real and fake halves, then one generator
  // update against the updated, frozen discriminator.
  StepReport train_step(const TrainBatch& batch) {
    const Tensor& y_in = batch.y_in.empty() ? batch.y : batch.y_in;
    const std::size_t b = batch.x.batch();
    if (b == 0) throw DataError("train_step: empty batch");
    batch.y.require_same_shape(batch.x, "train_step");
    y_in.require_same_shape(batch.x, "train_step");
    const double s = config_.smoothing_target();
    StepReport rep;
    rep.step = steps_done;

    Tensor z;
    if (config_.model.flags.latent) z = sample_latent(latent_rng_, b, g_.latent_length(), g_.latent_channels());
    GeneratorTrace g_trace;
    const Tensor x_hat = g_.forward(y_in, z.empty() ? nullptr : &z, &g_trace);

    // discriminator
    zero_grads(std::span(d_.parameters()));
    DLoss dl;
    if (!config_.d_two_steps) {
      DiscriminatorTrace tr;
      const Tensor scores = d_.forward(concat_batch(batch.x, x_hat), concat_batch(batch.y, batch.y), &tr);
      const Tensor real = slice_batch(scores, 0, b);
      const Tensor fake = slice_batch(scores, b, b);
      dl = d_loss(real, fake, s);
      check_losses({dl.real, dl.fake}, "discriminator");
      track_scores(scores);
      d_.backward(tr, concat_batch(d_loss_real_grad(real, s), d_loss_fake_grad(fake)));
      d_step();
    } else {
      DiscriminatorTrace tr;
      const Tensor real = d_.forward(batch.x, batch.y, &tr);
      dl.real = d_loss_real(real, s);
      check_losses({dl.real}, "discriminator");
      d_.backward(tr, d_loss_real_grad(real, s));
      d_step();
      zero_grads(std::span(d_.parameters()));
      const Tensor fake = d_.forward(x_hat, batch.y, &tr);
      dl.fake = d_loss_fake(fake);
      check_losses({dl.fake}, "discriminator");
      track_scores(concat_batch(real, fake));
      d_.backward(tr, d_loss_fake_grad(fake));
      d_step();
    }
    rep.d_loss_real = dl.real;
    rep.d_loss_fake = dl.fake;

    // generator; D only supplies the input gradient
    DiscriminatorTrace tr;
    const Tensor fake = d_.forward(x_hat, batch.y, &tr);
    const GLoss gl = g_loss(fake, x_hat, batch.x, config_.lambda_l1);
    check_losses({gl.adv, gl.l1}, "generator");
    Tensor grad = d_.backward(tr, g_loss_adv_grad(fake), false, true);
    grad += l1_loss_backward(x_hat, batch.x, config_.lambda_l1);
    zero_grads(std::span(g_.parameters()));
    g_.backward(g_trace, grad);
    try {
      g_opt_.step(std::span(g_.parameters()));
    } catch (const NumericError& e) {
      throw InstabilityError(e.what(), epochs_done + 1, steps_done);
    }
    rep.g_adv_loss = gl.adv;
    rep.g_l1_loss = gl.l1;
    ++steps_done;
    return rep;
  }

 private:
  void d_step() {
    try {
      d_opt_.step(std::span(d_.parameters()));
    } catch (const NumericError& e) {
      throw InstabilityError(e.what(), epochs_done + 1, steps_done);
    }
  }

  void check_losses(std::initializer_list<double> values, const char* who) const {
    for (double v : values) {
      if (!std::isfinite(v)) throw InstabilityError(std::string(who) + " loss is not finite", epochs_done + 1, steps_done);
    }
  }

  void track_scores(const Tensor& scores) {
    bool big = false;
    for (float v : scores.values()) big = big || !(std::abs(v) <= config_.score_limit);
    unstable_streak = big ? unstable_streak + 1 : 0;
    if (unstable_streak >= config_.score_patience) {
      char limit[32];
      std::snprintf(limit, sizeof limit, "%g", config_.score_limit);
      throw InstabilityError("|D score| above " + std::string(limit) + " for " + std::to_string(unstable_streak) +
                                 " consecutive steps",
                             epochs_done + 1, steps_done);
    }
  }

  TrainConfig config_;
  Generator g_;
  Discriminator d_;
  Adam g_opt_;
  Adam d_opt_;
  Rng latent_rng_;
  Rng shuffle_rng_;
};

struct HeldoutScore {
  double l1 = std::numeric_limits<double>::quiet_NaN();
  double segsnr = std::numeric_limits<double>::quiet_NaN();
};

// Mean waveform L1 and segSNR of `estimates` against the clean references.
inline HeldoutScore score_heldout(std::span<const Utterance> utts, std::span<const Waveform> estimates) {
  HeldoutScore s;
  if (utts.empty()) return s;
  double l1 = 0.0, snr = 0.0;
  for (std::size_t u = 0; u < utts.size(); ++u) {
    const auto& ref = utts[u].clean.samples;
    const auto& est = estimates[u].samples;
    double acc = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) acc += std::abs(est[i] - ref[i]);
    l1 += acc / static_cast<double>(ref.size());
    snr += seg_snr(utts[u].clean, estimates[u]);
  }
  s.l1 = l1 / static_cast<double>(utts.size());
  s.segsnr = snr / static_cast<double>(utts.size());
  return s;
}

inline HeldoutScore evaluate_heldout(const Trainer& t, std::span<const Utterance> utts) {
  std::vector<Waveform> est;
  for (const auto& u : utts) est.push_back(enhance_utterance(t.generator(), u.noisy, RunSeeds(t.config().seed).heldout_latent));
  return score_heldout(utts, est);
}

// The unprocessed baseline: noisy input scored as an estimate.
inline HeldoutScore noisy_baseline(std::span<const Utterance> utts) {
  std::vector<Waveform> est;
  for (const auto& u : utts) est.push_back(u.noisy);
  return score_heldout(utts, est);
}

struct TrainOutcome {
  bool aborted = false;
  std::string message;
  std::size_t abort_epoch = 0;
  std::uint64_t abort_step = 0;
};

using EpochCallback = std::function<void(const Trainer&)>;

// Runs the remaining epochs (from t.epochs_done to config.epochs). Each epoch
// reshuffles the frames, steps through them in batches, scores the held-out
// set and hands the trainer to `on_epoch` (checkpointing).
inline TrainOutcome train_epochs(Trainer& t, const FrameDataset& data, std::span<const Utterance> heldout,
                                 const EpochCallback& on_epoch = {}) {
  TrainOutcome out;
  const std::size_t n = data.size();
  const std::size_t bs = t.config().batch_size;
  std::vector<std::size_t> order(n);
  while (t.epochs_done < t.config().epochs) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[t.shuffle_rng().below(i)]);

    HistoryRow row;
    row.epoch = t.epochs_done + 1;
    std::size_t steps = 0;
    try {
      for (std::size_t first = 0; first < n; first += bs) {
        const std::span<const std::size_t> rows(order.data() + first, std::min(bs, n - first));
        TrainBatch batch{gather_batch(data.x, rows), gather_batch(data.y, rows),
                         t.config().model.flags.preemph_layer ? gather_batch(data.y_in, rows) : Tensor{}};
        const StepReport r = t.train_step(batch);
        row.d_loss_real += r.d_loss_real;
        row.d_loss_fake += r.d_loss_fake;
        row.g_adv += r.g_adv_loss;
        row.g_l1 += r.g_l1_loss;
        ++steps;
      }
    } catch (const InstabilityError& e) {
      out.aborted = true;
      out.message = e.what();
      out.abort_epoch = e.epoch();
      out.abort_step = e.step();
      if (steps > 0) {
        const double k = static_cast<double>(steps);
        row.d_loss_real /= k;
        row.d_loss_fake /= k;
        row.g_adv /= k;
        row.g_l1 /= k;
      } else {
        row.d_loss_real = row.d_loss_fake = row.g_adv = row.g_l1 = std::numeric_limits<double>::quiet_NaN();
      }
      t.history.push_back(row);
      return out;
    }
    const double k = static_cast<double>(std::max<std::size_t>(steps, 1));
    row.d_loss_real /= k;
    row.d_loss_fake /= k;
    row.g_adv /= k;
    row.g_l1 /= k;
    const HeldoutScore hs = evaluate_heldout(t, heldout);
    row.heldout_l1 = hs.l1;
    row.heldout_segsnr = hs.segsnr;
    t.history.push_back(row);
    ++t.epochs_done;
    if (on_epoch) on_epoch(t);
  }
  return out;
}

}  // namespace wge
