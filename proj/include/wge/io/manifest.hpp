#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "wge/core/error.hpp"
#include "wge/io/config_file.hpp"
#include "wge/io/synth.hpp"
#include "wge/io/wav.hpp"
#include "wge/train/dataset.hpp"

namespace wge {

// One line per entry, tab separated, '#' starts a comment line:
//   pair  <split>  <id>  <clean.wav>  <noisy.wav>
//   mix   <split>  <id>  <clean.wav>  <noise.wav>  <snr_db>  <seed>
// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
  enum class Kind { Pair, Mix };
  Kind kind = Kind::Pair;
  std::string split;
  std::string id;
  std::filesystem::path clean;
  std::filesystem::path second;  // noisy (pair) or noise (mix)
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::filesystem::path base;
};

inline bool valid_split(const std::string& s) { return s == "train" || s == "heldout" || s == "test"; }

inline Manifest parse_manifest(const std::string& text, const std::filesystem::path& base,
                               const std::string& origin = "manifest") {
  Manifest m;
  m.base = base;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty() || detail::trim(line)[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, '\t')) f.push_back(item);
    const std::string where = origin + ":" + std::to_string(lineno);
    ManifestEntry e;
    if (f[0] == "pair" && f.size() == 5) {
      e.kind = ManifestEntry::Kind::Pair;
    } else if (f[0] == "mix" && f.size() == 7) {
      e.kind = ManifestEntry::Kind::Mix;
      try {
        e.snr_db = detail::parse_double("snr_db", f[5]);
        e.seed = detail::parse_uint("seed", f[6]);
      } catch (const ConfigError& err) {
        throw DataError(where + ": " + err.what());
      }
    } else {
      throw DataError(where + ": expected 'pair' with 5 fields or 'mix' with 7 tab-separated fields");
    }
    e.split = f[1];
    e.id = f[2];
    e.clean = f[3];
    e.second = f[4];
    if (!valid_split(e.split)) throw DataError(where + ": split must be train, heldout or test, got '" + e.split + "'");
    if (e.id.empty()) throw DataError(where + ": empty id");
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline std::string format_manifest(const Manifest& m) {
  std::string out = "# kind\tsplit\tid\tclean\tnoisy|noise\t[snr_db\tseed]\n";
  for (const auto& e : m.entries) {
    const bool mix = e.kind == ManifestEntry::Kind::Mix;
    out += std::string(mix ? "mix" : "pair") + "\t" + e.split + "\t" + e.id + "\t" + e.clean.generic_string() + "\t" +
           e.second.generic_string();
    if (mix) out += "\t" + detail::fmt_double(e.snr_db) + "\t" + std::to_string(e.seed);
    out += "\n";
  }
  return out;
}

inline std::filesystem::path resolve(const Manifest& m, const std::filesystem::path& p) {
  return p.is_absolute() ? p : m.base / p;
}

// Parses and checks that every referenced file exists.
inline Manifest load_manifest(const std::filesystem::path& path) {
  Manifest m = parse_manifest(detail::read_file(path), path.parent_path(), path.string());
  for (const auto& e : m.entries) {
    for (const auto* p : {&e.clean, &e.second}) {
      if (!std::filesystem::is_regular_file(resolve(m, *p))) {
        throw DataError(path.string() + ": entry '" + e.id + "' references missing file " + resolve(m, *p).string());
      }
    }
  }
  return m;
}

inline Utterance load_entry(const Manifest& m, const ManifestEntry& e) {
  Utterance u;
  u.id = e.id;
  u.clean = read_wav(resolve(m, e.clean));
  const Waveform other = read_wav(resolve(m, e.second));
  if (e.kind == ManifestEntry::Kind::Pair) {
    if (other.size() != u.clean.size()) {
      throw DataError("entry '" + e.id + "': clean and noisy lengths differ (" + std::to_string(u.clean.size()) +
                      " vs " + std::to_string(other.size()) + ")");
    }
    u.noisy = other;
  } else {
    u.noisy = mix_recipe(u.clean, other, e.snr_db, e.seed);
  }
  return u;
}

inline std::vector<Utterance> load_split(const Manifest& m, const std::string& split) {
  std::vector<Utterance> out;
  for (const auto& e : m.entries)
    if (e.split == split) out.push_back(load_entry(m, e));
  return out;
}

}  // namespace wge
