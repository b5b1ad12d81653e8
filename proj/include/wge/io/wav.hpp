#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wge/core/error.hpp"
#include "wge/dsp/waveform.hpp"

namespace wge {

// float -> PCM16: scale by 32768, round, saturate to [-32768, 32767].
inline std::int16_t to_pcm16(double v) {
  const double s = std::nearbyint(v * 32768.0);
  return static_cast<std::int16_t>(std::clamp(s, -32768.0, 32767.0));
}

inline double from_pcm16(std::int16_t v) { return static_cast<double>(v) / 32768.0; }

namespace detail {

inline void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>(v >> 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
inline std::uint16_t get_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | p[1] << 8); }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes via a temporary sibling and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::string encode_wav(const std::vector<std::int16_t>& pcm) {
  std::string b;
  const auto data_bytes = static_cast<std::uint32_t>(pcm.size() * 2);
  b += "RIFF";
  detail::put_u32(b, 36 + data_bytes);
  b += "WAVEfmt ";
  detail::put_u32(b, 16);
  detail::put_u16(b, 1);  // PCM
  detail::put_u16(b, 1);  // mono
  detail::put_u32(b, kSampleRate);
  detail::put_u32(b, kSampleRate * 2);
  detail::put_u16(b, 2);
  detail::put_u16(b, 16);
  b += "data";
  detail::put_u32(b, data_bytes);
  for (auto s : pcm) detail::put_u16(b, static_cast<std::uint16_t>(s));
  return b;
}

// Parses RIFF/WAVE PCM16 mono 16 kHz; unknown chunks are skipped.
inline std::vector<std::int16_t> decode_wav(const std::string& bytes, const std::string& name = "wav") {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw DataError(name + ": not a RIFF/WAVE file (malformed header)");
  }
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t size = detail::get_u32(p + pos + 4);
    const unsigned char* body = p + pos + 8;
    if (pos + 8 + size > n) throw DataError(name + ": truncated chunk");
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(name + ": malformed fmt chunk");
      const auto format = detail::get_u16(body);
      const auto channels = detail::get_u16(body + 2);
      const auto rate = detail::get_u32(body + 4);
      const auto bits = detail::get_u16(body + 14);
      if (format != 1) throw DataError(name + ": only PCM is supported (format tag " + std::to_string(format) + ")");
      if (channels != 1) throw DataError(name + ": expected mono, got " + std::to_string(channels) + " channels");
      if (rate != kSampleRate) {
        throw DataError(name + ": sample rate " + std::to_string(rate) + " Hz, expected " +
                        std::to_string(kSampleRate) + " Hz (resample beforehand)");
      }
      if (bits != 16) throw DataError(name + ": expected 16-bit samples, got " + std::to_string(bits));
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (!have_fmt) throw DataError(name + ": data chunk before fmt chunk");
      if (size % 2 != 0) throw DataError(name + ": odd data chunk size");
      std::vector<std::int16_t> pcm(size / 2);
      for (std::size_t i = 0; i < pcm.size(); ++i) pcm[i] = static_cast<std::int16_t>(detail::get_u16(body + 2 * i));
      return pcm;
    }
    pos += 8 + size + (size & 1);
  }
  throw DataError(name + (have_fmt ? ": no data chunk" : ": truncated header (no fmt chunk)"));
}

inline Waveform read_wav(const std::filesystem::path& path) {
  const auto pcm = decode_wav(detail::read_file(path), path.string());
  Waveform w;
  w.samples.reserve(pcm.size());
  for (auto s : pcm) w.samples.push_back(from_pcm16(s));
  return w;
}

inline void write_wav(const std::filesystem::path& path, const Waveform& w) {
  std::vector<std::int16_t> pcm;
  pcm.reserve(w.size());
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw DataError(path.string() + ": refusing to write non-finite samples");
    pcm.push_back(to_pcm16(v));
  }
  detail::write_file_atomic(path, encode_wav(pcm));
}

}  // namespace wge
