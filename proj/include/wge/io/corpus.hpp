#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "wge/core/error.hpp"
#include "wge/io/manifest.hpp"
#include "wge/io/synth.hpp"
#include "wge/io/wav.hpp"

namespace wge {

inline std::string corpus_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "utt%04zu", i);
  return buf;
}

// Writes clean/, noise/ and noisy/ WAVs plus manifest.tsv under `out`. The
// manifest carries mix recipes; noisy/ holds the same mixtures rendered for
// enhance/evaluate. The last `n_heldout` utterances form the heldout split.
inline Manifest synth_corpus(std::uint64_t seed, std::size_t n_utts, double duration_s,
                             const std::filesystem::path& out, std::size_t n_heldout = 0) {
  if (n_utts == 0) throw ConfigError("synth-data: need at least one utterance");
  if (n_heldout > n_utts) throw ConfigError("synth-data: more heldout utterances than utterances");
  const std::uint64_t corpus_seed = sub_seed(seed, "corpus");
  Manifest m;
  m.base = out;
  for (std::size_t i = 0; i < n_utts; ++i) {
    const SynthUtterance s = synth_utterance(corpus_seed, i, duration_s);
    ManifestEntry e;
    e.kind = ManifestEntry::Kind::Mix;
    e.split = i + n_heldout >= n_utts ? "heldout" : "train";
    e.id = corpus_id(i);
    e.clean = "clean/" + e.id + ".wav";
    e.second = "noise/" + e.id + ".wav";
    e.snr_db = s.snr_db;
    e.seed = s.mix_seed;
    write_wav(out / e.clean, s.clean);
    write_wav(out / e.second, s.noise);
    // render from the quantized files so noisy/ matches what the recipe yields
    const Utterance u = load_entry(m, e);
    write_wav(out / "noisy" / (e.id + ".wav"), u.noisy);
    m.entries.push_back(std::move(e));
  }
  detail::write_file_atomic(out / "manifest.tsv", format_manifest(m));
  return m;
}

}  // namespace wge
