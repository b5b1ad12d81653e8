#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "wge/core/gradcheck.hpp"
#include "wge/core/parallel.hpp"
#include "wge/dsp/gammatone.hpp"
#include "wge/io/checkpoint.hpp"
#include "wge/io/config_file.hpp"
#include "wge/io/corpus.hpp"
#include "wge/io/csv.hpp"
#include "wge/io/manifest.hpp"
#include "wge/metrics/metrics.hpp"
#include "wge/train/enhance.hpp"
#include "wge/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace wge;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

std::vector<fs::path> wav_files(const fs::path& dir_or_file) {
  if (fs::is_regular_file(dir_or_file)) return {dir_or_file};
  if (!fs::is_directory(dir_or_file)) throw DataError(dir_or_file.string() + ": no such file or directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir_or_file)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError(dir_or_file.string() + ": no .wav files");
  return out;
}

struct TrainArgs {
  std::string config, data, out, resume;
  std::vector<std::string> set;
};

TrainConfig resolve_config(const TrainArgs& a) {
  std::string text = a.config.empty() ? std::string() : detail::read_file(a.config);
  for (const auto& kv : a.set) text += "\n" + kv;
  return parse_train_config(text, a.config.empty() ? "--set" : a.config);
}

int cmd_train(const TrainArgs& a) {
  const fs::path out(a.out);
  const Manifest m = load_manifest(a.data);
  const auto train = load_split(m, "train");
  const auto heldout = load_split(m, "heldout");
  if (train.empty()) throw DataError(a.data + ": no train entries");

  std::unique_ptr<Trainer> t;
  if (!a.resume.empty()) {
    t = std::make_unique<Trainer>(load_checkpoint(a.resume));
    if (!a.config.empty() || !a.set.empty()) {
      TrainConfig want = resolve_config(a);
      const std::size_t epochs = want.epochs;
      want.epochs = t->config().epochs;
      if (!(want == t->config())) {
        throw ConfigError("--resume: config differs from the checkpoint's in more than 'epochs'");
      }
      t->set_epochs(epochs);
    }
    std::cout << "resuming from " << a.resume << " at epoch " << t->epochs_done << "\n";
  } else {
    if (a.config.empty() && a.set.empty()) throw ConfigError("train: --config (or --set) is required");
    t = std::make_unique<Trainer>(resolve_config(a));
  }
  const FrameDataset data = build_frame_dataset(train, t->config().model);
  std::cout << "train: " << train.size() << " utterances, " << data.size() << " frames; heldout: " << heldout.size()
            << " utterances\n";
  if (!heldout.empty()) {
    const HeldoutScore base = noisy_baseline(heldout);
    std::printf("noisy heldout: l1 %.6f segsnr %.3f dB\n", base.l1, base.segsnr);
  }
  fs::create_directories(out);
  detail::write_file_atomic(out / "config.txt", format_train_config(t->config()));

  const TrainOutcome r = train_epochs(*t, data, heldout, [&](const Trainer& tr) {
    const HistoryRow& h = tr.history.back();
    std::printf("epoch %zu  d_real %.5f d_fake %.5f g_adv %.5f g_l1 %.6f  heldout l1 %.6f segsnr %.3f\n", h.epoch,
                h.d_loss_real, h.d_loss_fake, h.g_adv, h.g_l1, h.heldout_l1, h.heldout_segsnr);
    std::fflush(stdout);
    save_checkpoint(out / "latest.ckpt", tr);
    detail::write_file_atomic(out / "history.csv", history_csv(tr.history));
  });
  detail::write_file_atomic(out / "history.csv", history_csv(t->history));
  if (r.aborted) {
    std::cerr << "training aborted: numerical instability at epoch " << r.abort_epoch << ", step " << r.abort_step
              << ": " << r.message << "\n";
    return kNumeric;
  }
  save_checkpoint(out / "final.ckpt", *t);
  std::cout << "wrote " << (out / "final.ckpt").string() << "\n";
  return kOk;
}

int cmd_enhance(const std::string& ckpt, const std::string& in, const std::string& out, std::uint64_t seed,
                bool seed_given) {
  const Trainer t = load_checkpoint(ckpt);
  const auto files = wav_files(in);
  const std::uint64_t root = seed_given ? seed : sub_seed(t.config().seed, "enhance");
  parallel_for(files.size(), worker_count(), [&](std::size_t i) {
    const Waveform y = read_wav(files[i]);
    const Waveform x_hat = enhance_utterance(t.generator(), y, sub_seed(root, files[i].filename().string()));
    write_wav(fs::path(out) / files[i].filename(), x_hat);
  });
  for (const auto& f : files) std::cout << (fs::path(out) / f.filename()).string() << "\n";
  return kOk;
}

int cmd_evaluate(const std::string& ref, const std::string& est, const std::string& out) {
  const auto refs = wav_files(ref);
  std::vector<UtteranceMetrics> rows(refs.size());
  parallel_for(refs.size(), worker_count(), [&](std::size_t i) {
    const fs::path est_path = fs::is_directory(est) ? fs::path(est) / refs[i].filename() : fs::path(est);
    if (!fs::exists(est_path)) throw DataError("no estimate for " + refs[i].string() + " (looked for " + est_path.string() + ")");
    rows[i] = evaluate_pair({refs[i].stem().string(), read_wav(refs[i]), read_wav(est_path)});
  });
  const MetricReport rep = summarize(std::move(rows));
  detail::write_file_atomic(out, metrics_csv(rep));
  for (const auto& u : rep.utterances) {
    if (!u.ok) std::cerr << "warning: " << u.id << ": " << u.error << "\n";
  }
  std::printf("%zu utterances (%zu failed): segSNR %.3f dB  CD %.3f dB  LLR %.4f\n", rep.utterances.size(),
              rep.failures, rep.mean_segsnr_db, rep.mean_cd_db, rep.mean_llr);
  return rep.failures == rep.utterances.size() ? kData : kOk;
}

int cmd_synth(std::uint64_t seed, std::size_t n, double dur, const std::string& out, long heldout) {
  const std::size_t h = heldout < 0 ? n / 4 : static_cast<std::size_t>(heldout);
  const Manifest m = synth_corpus(seed, n, dur, out, h);
  std::cout << "wrote " << m.entries.size() << " utterances (" << h << " heldout) to " << out << "/manifest.tsv\n";
  return kOk;
}

int cmd_design_gt(std::size_t n, double flow, double fhigh, std::size_t width, const std::string& out) {
  const GammatoneBank bank = design_gammatone_bank(n, flow, fhigh, kSampleRate, width);
  std::string csv = "filter,center_hz,peak_hz";
  for (std::size_t t = 0; t < width; ++t) csv += ",tap" + std::to_string(t);
  csv += "\n";
  for (std::size_t f = 0; f < n; ++f) {
    csv += std::to_string(f) + "," + detail::fmt_double(bank.center_freqs[f]) + "," +
           detail::fmt_double(peak_frequency(bank.kernels[f]));
    for (double v : bank.kernels[f]) csv += "," + detail::fmt_double(v);
    csv += "\n";
  }
  detail::write_file_atomic(out, csv);
  std::cout << "wrote " << n << " filters to " << out << "\n";
  return kOk;
}

int cmd_gradcheck(std::size_t instances, std::uint64_t seed, double tolerance) {
  bool ok = true;
  for (const auto& r : run_gradient_suite(instances, seed, tolerance)) {
    std::printf("%-18s %3zu instances  worst rel err %.3e  %s\n", r.op.c_str(), r.instances, r.worst_relative_error,
                r.passed ? "ok" : "FAIL");
    ok = ok && r.passed;
  }
  return ok ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raw-waveform GAN speech enhancer: training, enhancement and evaluation"};
  app.require_subcommand(1);
  app.footer("exit codes: 0 ok, 1 usage/config error, 2 data error, 3 numerical failure\n"
             "WGE_THREADS caps the workers used by enhance and evaluate.");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train G and D on a manifest's train split");
  train->add_option("--config", ta.config, "key = value config file")->check(CLI::ExistingFile);
  train->add_option("--data", ta.data, "manifest (train and heldout splits are used)")->required();
  train->add_option("--out", ta.out, "output directory for checkpoints and history.csv")->required();
  train->add_option("--resume", ta.resume, "continue from a checkpoint; --config/--set may only change epochs")->check(CLI::ExistingFile);
  train->add_option("--set", ta.set, "extra 'key=value' overrides, applied after --config");
  train->footer("config keys:\n" + config_help());

  std::string ckpt, in, eout;
  std::uint64_t eseed = 0;
  auto* enhance = app.add_subcommand("enhance", "enhance a WAV file or every WAV in a directory");
  enhance->add_option("--ckpt", ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  enhance->add_option("--in", in, "input .wav or directory")->required();
  enhance->add_option("--out", eout, "output directory")->required();
  auto* eseed_opt = enhance->add_option("--seed", eseed, "latent seed (default: derived from the checkpoint seed)");

  std::string ref, est, mout;
  auto* evaluate = app.add_subcommand("evaluate", "segSNR, cepstral distance and LLR per utterance");
  evaluate->add_option("--ref", ref, "clean reference .wav or directory")->required();
  evaluate->add_option("--est", est, "estimate .wav or directory (matched by file name)")->required();
  evaluate->add_option("--out", mout, "metrics CSV")->required();

  std::uint64_t sseed = 1;
  std::size_t sn = 16;
  double sdur = 2.0;
  long sheld = -1;
  std::string sout;
  auto* synth = app.add_subcommand("synth-data", "write a synthetic speech-in-noise corpus and manifest");
  synth->add_option("--seed", sseed, "corpus seed")->capture_default_str();
  synth->add_option("--n", sn, "number of utterances")->capture_default_str();
  synth->add_option("--dur", sdur, "seconds per utterance (>= 2)")->capture_default_str();
  synth->add_option("--heldout", sheld, "utterances in the heldout split (default n/4)");
  synth->add_option("--out", sout, "output directory")->required();

  std::size_t gn = 16, gwidth = 31;
  double gflow = 50.0, gfhigh = 7600.0;
  std::string gout;
  auto* gt = app.add_subcommand("design-gt", "dump a gammatone filterbank as CSV");
  gt->add_option("--n", gn, "number of filters")->capture_default_str();
  gt->add_option("--flow", gflow, "lowest center frequency, Hz")->capture_default_str();
  gt->add_option("--fhigh", gfhigh, "highest center frequency, Hz")->capture_default_str();
  gt->add_option("--width", gwidth, "taps per filter")->capture_default_str();
  gt->add_option("--out", gout, "output CSV")->required();

  std::size_t ginst = 20;
  std::uint64_t gseed = 1234;
  double gtol = 1e-4;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every differentiable primitive");
  grad->add_option("--instances", ginst, "random instances per op")->capture_default_str();
  grad->add_option("--seed", gseed, "seed")->capture_default_str();
  grad->add_option("--tolerance", gtol, "relative error bound")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*enhance) return cmd_enhance(ckpt, in, eout, eseed, eseed_opt->count() > 0);
    if (*evaluate) return cmd_evaluate(ref, est, mout);
    if (*synth) return cmd_synth(sseed, sn, sdur, sout, sheld);
    if (*gt) return cmd_design_gt(gn, gflow, gfhigh, gwidth, gout);
    if (*grad) return cmd_gradcheck(ginst, gseed, gtol);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const InstabilityError& e) {
    std::cerr << "numerical instability: " << e.what() << "\n";
    return kNumeric;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
