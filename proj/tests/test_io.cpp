#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "wge/io/checkpoint.hpp"
#include "wge/io/config_file.hpp"
#include "wge/io/corpus.hpp"
#include "wge/io/csv.hpp"
#include "wge/io/manifest.hpp"
#include "wge/io/wav.hpp"

using namespace wge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wge_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TrainConfig toy_config() {
  TrainConfig c;
  c.model.feature_maps = {4, 8};
  c.model.filter_width = 9;
  c.model.input_length = 64;
  c.batch_size = 2;
  c.epochs = 4;
  c.seed = 11;
  return c;
}

std::vector<Utterance> toy_utterances(std::size_t n, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Utterance> out;
  for (std::size_t u = 0; u < n; ++u) {
    Utterance utt;
    utt.id = "u" + std::to_string(u);
    for (std::size_t i = 0; i < len; ++i) {
      const double c = 0.3 * std::sin(0.05 * double(i) * double(u + 1));
      utt.clean.samples.push_back(c);
      utt.noisy.samples.push_back(c + 0.05 * rng.normal());
    }
    out.push_back(std::move(utt));
  }
  return out;
}

std::string wav_bytes_with_rate(std::uint32_t rate) {
  std::string b = encode_wav({1, 2, 3});
  for (int i = 0; i < 4; ++i) b[24 + i] = static_cast<char>((rate >> (8 * i)) & 0xFF);
  return b;
}

TEST_CASE("WAV integer round trip is exact", "[wav]") {
  Rng rng(1);
  std::vector<std::int16_t> pcm(1000);
  for (auto& s : pcm) s = static_cast<std::int16_t>(static_cast<std::int64_t>(rng.below(65536)) - 32768);
  pcm[0] = -32768;
  pcm[1] = 32767;
  CHECK(decode_wav(encode_wav(pcm)) == pcm);

  const fs::path dir = scratch("wav");
  Waveform w;
  for (auto s : pcm) w.samples.push_back(from_pcm16(s));
  write_wav(dir / "a.wav", w);
  const Waveform r = read_wav(dir / "a.wav");
  REQUIRE(r.size() == pcm.size());
  for (std::size_t i = 0; i < pcm.size(); ++i) CHECK(to_pcm16(r.samples[i]) == pcm[i]);
  CHECK(r.samples == w.samples);
}

TEST_CASE("PCM conversion saturates symmetrically", "[wav]") {
  CHECK(to_pcm16(0.0) == 0);
  CHECK(to_pcm16(1.0) == 32767);
  CHECK(to_pcm16(2.5) == 32767);
  CHECK(to_pcm16(-1.0) == -32768);
  CHECK(to_pcm16(-7.0) == -32768);
  CHECK(to_pcm16(0.5) == 16384);
  CHECK(from_pcm16(-32768) == -1.0);
}

TEST_CASE("WAV decoder rejects what it cannot read", "[wav]") {
  CHECK_THROWS_WITH(decode_wav(wav_bytes_with_rate(44100)), Catch::Matchers::ContainsSubstring("44100"));
  const std::string good = encode_wav({1, 2, 3});
  CHECK_THROWS_AS(decode_wav(good.substr(0, 20)), DataError);
  CHECK_THROWS_AS(decode_wav(good.substr(0, 8)), DataError);
  CHECK_THROWS_AS(decode_wav("not a wav file at all"), DataError);

  std::string stereo = good;
  stereo[22] = 2;
  CHECK_THROWS_WITH(decode_wav(stereo), Catch::Matchers::ContainsSubstring("mono"));
  std::string eight_bit = good;
  eight_bit[34] = 8;
  CHECK_THROWS_AS(decode_wav(eight_bit), DataError);
  std::string float_fmt = good;
  float_fmt[20] = 3;
  CHECK_THROWS_AS(decode_wav(float_fmt), DataError);
  CHECK_THROWS_AS(read_wav("/nonexistent/x.wav"), DataError);

  Waveform nan_wave({0.0, std::nan("")});
  CHECK_THROWS_AS(write_wav(scratch("nan") / "x.wav", nan_wave), DataError);
}

TEST_CASE("WAV decoder skips unknown chunks", "[wav]") {
  std::string b = encode_wav({5, -6, 7});
  std::string list = "LIST";
  detail::put_u32(list, 3);
  list += "abc";
  list += '\0';  // pad byte
  b.insert(36, list);
  CHECK(decode_wav(b) == std::vector<std::int16_t>{5, -6, 7});
}

TEST_CASE("config text parses, rejects unknown keys and round-trips", "[config]") {
  const TrainConfig desk = parse_train_config("scale = desk\n");
  CHECK(desk == TrainConfig::desk());
  const TrainConfig c = parse_train_config("# comment\nepochs = 7\nscale = desk\nin = false\nfeature_maps = 4, 8\n");
  CHECK(c.epochs == 7);
  CHECK(c.batch_size == TrainConfig::desk().batch_size);
  CHECK_FALSE(c.model.flags.instance_norm);
  CHECK(c.model.feature_maps == std::vector<std::size_t>{4, 8});
  CHECK(parse_train_config(format_train_config(c)) == c);
  CHECK(parse_train_config(format_train_config(TrainConfig{})) == TrainConfig{});

  CHECK_THROWS_WITH(parse_train_config("epochz = 3\n"), Catch::Matchers::ContainsSubstring("epochz"));
  CHECK_THROWS_AS(parse_train_config("epochs = -3\n"), ConfigError);
  CHECK_THROWS_AS(parse_train_config("lr = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_train_config("in = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_train_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_train_config("lambda_l1 = -1\n"), ConfigError);
  CHECK_THROWS_AS(load_train_config("/nonexistent/train.cfg"), ConfigError);

  const std::string help = config_help();
  for (const auto& k : detail::config_keys()) CHECK(help.find(k.name) != std::string::npos);
}

TEST_CASE("manifest parses both entry kinds", "[manifest]") {
  const Manifest m = parse_manifest(
      "# header\n"
      "pair\ttrain\ta\tclean/a.wav\tnoisy/a.wav\n"
      "\n"
      "mix\theldout\tb\t/abs/clean.wav\tnoise/b.wav\t5\t42\n",
      "/base");
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].kind == ManifestEntry::Kind::Pair);
  CHECK(resolve(m, m.entries[0].clean) == fs::path("/base/clean/a.wav"));
  CHECK(m.entries[1].kind == ManifestEntry::Kind::Mix);
  CHECK(m.entries[1].snr_db == 5.0);
  CHECK(m.entries[1].seed == 42);
  CHECK(resolve(m, m.entries[1].clean) == fs::path("/abs/clean.wav"));
  CHECK(parse_manifest(format_manifest(m), "/base").entries.size() == 2);

  CHECK_THROWS_AS(parse_manifest("pair\ttrain\ta\tonly-one.wav\n", "."), DataError);
  CHECK_THROWS_AS(parse_manifest("pair\tvalid\ta\tc.wav\tn.wav\n", "."), DataError);
  CHECK_THROWS_AS(parse_manifest("mix\ttrain\ta\tc.wav\tn.wav\tloud\t1\n", "."), DataError);
  CHECK_THROWS_AS(parse_manifest("copy\ttrain\ta\tc.wav\tn.wav\n", "."), DataError);

  const fs::path dir = scratch("manifest");
  detail::write_file_atomic(dir / "m.tsv", "pair\ttrain\ta\tmissing.wav\tmissing2.wav\n");
  CHECK_THROWS_WITH(load_manifest(dir / "m.tsv"), Catch::Matchers::ContainsSubstring("missing.wav"));
}

TEST_CASE("synthetic corpus on disk: deterministic, recorded SNRs, full grid", "[corpus]") {
  const fs::path a = scratch("corpus_a"), b = scratch("corpus_b");
  const Manifest ma = synth_corpus(3, 8, 2.0, a, 2);
  synth_corpus(3, 8, 2.0, b, 2);
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    CHECK(detail::read_file(entry.path()) == detail::read_file(b / rel));
  }

  const Manifest loaded = load_manifest(a / "manifest.tsv");
  REQUIRE(loaded.entries.size() == 8);
  std::set<double> snrs;
  for (const auto& e : loaded.entries) {
    snrs.insert(e.snr_db);
    const Utterance u = load_entry(loaded, e);
    CHECK(std::abs(measured_snr_db(u.clean, u.noisy) - e.snr_db) < 1e-6);
  }
  CHECK(snrs == std::set<double>{0.0, 5.0, 10.0, 15.0});
  CHECK(load_split(loaded, "train").size() == 6);
  CHECK(load_split(loaded, "heldout").size() == 2);
  CHECK(load_split(loaded, "heldout")[1].id == "utt0007");
  CHECK(fs::exists(a / "noisy" / "utt0000.wav"));

  synth_corpus(4, 2, 2.0, b);
  CHECK(detail::read_file(a / "clean/utt0000.wav") != detail::read_file(b / "clean/utt0000.wav"));
  CHECK_THROWS_AS(synth_corpus(3, 2, 1.5, scratch("corpus_c")), ConfigError);
}

TEST_CASE("checkpoint: load then save is byte-identical", "[checkpoint]") {
  const auto utts = toy_utterances(3, 200, 2);
  const TrainConfig cfg = toy_config();
  Trainer t(cfg);
  const auto data = build_frame_dataset(std::span(utts).first(2), cfg.model);
  TrainConfig two = cfg;
  two.epochs = 2;
  Trainer partial(two);
  train_epochs(partial, data, std::span(utts).last(1));

  for (const Trainer* tr : {&t, &partial}) {
    const std::string bytes = serialize_checkpoint(*tr);
    CHECK(serialize_checkpoint(deserialize_checkpoint(bytes)) == bytes);
  }
  const fs::path dir = scratch("ckpt");
  save_checkpoint(dir / "sub" / "a.ckpt", partial);
  const Trainer back = load_checkpoint(dir / "sub" / "a.ckpt");
  CHECK(back.epochs_done == 2);
  CHECK(back.history.size() == 2);
  CHECK(back.config() == two);
  CHECK_FALSE(fs::exists(dir / "sub" / "a.ckpt.tmp"));
}

TEST_CASE("checkpoint: corruption and version mismatch are rejected", "[checkpoint]") {
  const std::string good = serialize_checkpoint(Trainer(toy_config()));
  std::string magic = good;
  magic[1] ^= 0x01;
  CHECK_THROWS_WITH(deserialize_checkpoint(magic), Catch::Matchers::ContainsSubstring("magic"));
  std::string version = good;
  version[8] = 2;
  CHECK_THROWS_WITH(deserialize_checkpoint(version), Catch::Matchers::ContainsSubstring("version"));
  std::string body = good;
  body[good.size() / 2] ^= 0x10;
  CHECK_THROWS_WITH(deserialize_checkpoint(body), Catch::Matchers::ContainsSubstring("checksum"));
  CHECK_THROWS_AS(deserialize_checkpoint(good.substr(0, good.size() - 9)), DataError);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.ckpt"), DataError);
}

TEST_CASE("checkpoint: config and array shapes must agree", "[checkpoint]") {
  // splice a different feature-map list into the embedded config and re-seal the CRC
  const std::string good = serialize_checkpoint(Trainer(toy_config()));
  std::string tampered = good;
  const auto pos = tampered.find("feature_maps = 4,8");
  REQUIRE(pos != std::string::npos);
  tampered.replace(pos, 18, "feature_maps = 4,9");
  const std::uint32_t crc = detail::crc32_of(tampered.data(), tampered.size() - 4);
  std::memcpy(tampered.data() + tampered.size() - 4, &crc, 4);
  CHECK_THROWS_WITH(deserialize_checkpoint(tampered), Catch::Matchers::ContainsSubstring("shape"));
}

TEST_CASE("checkpoint: resume equals straight-through", "[checkpoint]") {
  const auto utts = toy_utterances(3, 300, 6);
  const TrainConfig cfg = toy_config();
  const auto data = build_frame_dataset(std::span(utts).first(2), cfg.model);

  std::string at_two;
  Trainer straight(cfg);
  train_epochs(straight, data, std::span(utts).last(1), [&](const Trainer& t) {
    if (t.epochs_done == 2) at_two = serialize_checkpoint(t);
  });
  REQUIRE_FALSE(at_two.empty());
  Trainer resumed = deserialize_checkpoint(at_two);
  train_epochs(resumed, data, std::span(utts).last(1));
  CHECK(serialize_checkpoint(resumed) == serialize_checkpoint(straight));
}

TEST_CASE("CSV writers", "[csv]") {
  std::vector<HistoryRow> rows(2);
  rows[0].epoch = 1;
  rows[0].g_l1 = 0.5;
  rows[1].epoch = 2;
  const std::string h = history_csv(rows);
  CHECK(h.rfind("epoch,d_loss_real,d_loss_fake,g_adv,g_l1,heldout_l1,heldout_segsnr\n", 0) == 0);
  CHECK(h.find("\n1,0,0,0,0.5,nan,nan\n") != std::string::npos);

  MetricReport rep = summarize({UtteranceMetrics{"a", 35, 0, 0, true, ""}, UtteranceMetrics{"b", 0, 0, 0, false, "x"}});
  const std::string m = metrics_csv(rep);
  CHECK(m == "utterance_id,segsnr_db,cd_db,llr\na,35,0,0\nb,,,\nmean,35,0,0\n");
}

}  // namespace
