#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "wge/core/error.hpp"
#include "wge/io/config_file.hpp"
#include "wge/io/wav.hpp"
#include "wge/train/trainer.hpp"

namespace wge {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'W', 'G', 'E', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class Writer {
 public:
  std::string bytes;
  template <typename T>
  void pod(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes.append(buf, sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes += s;
  }
  void array(const std::string& name, const Tensor& t) {
    str(name);
    pod<std::uint32_t>(3);
    pod<std::uint64_t>(t.batch());
    pod<std::uint64_t>(t.length());
    pod<std::uint64_t>(t.channels());
    bytes.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
  }
};

class Reader {
 public:
  Reader(const std::string& b, std::size_t end, std::string origin) : b_(b), end_(end), origin_(std::move(origin)) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Tensor array(const std::string& expect_name, const Shape& expect_shape) {
    const std::string name = str();
    if (name != expect_name) fail("expected array '" + expect_name + "', found '" + name + "'");
    if (pod<std::uint32_t>() != 3) fail("array '" + name + "' is not rank 3");
    Shape s;
    s.batch = pod<std::uint64_t>();
    s.length = pod<std::uint64_t>();
    s.channels = pod<std::uint64_t>();
    if (s != expect_shape) {
      fail("array '" + name + "' has shape " + s.str() + " but the configured model needs " + expect_shape.str());
    }
    Tensor t(s);
    need(t.size() * sizeof(float));
    std::memcpy(t.data(), b_.data() + pos_, t.size() * sizeof(float));
    pos_ += t.size() * sizeof(float);
    return t;
  }
  bool done() const { return pos_ == end_; }
  void seek(std::size_t p) { pos_ = p; }
  [[noreturn]] void fail(const std::string& what) const { throw DataError(origin_ + ": " + what); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) fail("truncated checkpoint");
  }
  const std::string& b_;
  std::size_t end_;
  std::string origin_;
  std::size_t pos_ = 0;
};

inline void write_params(Writer& w, const std::vector<Parameter>& ps) {
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(ps.size()));
  for (const auto& p : ps) w.array(p.name, p.value);
}

inline void write_adam(Writer& w, const Adam& a, const std::vector<Parameter>& ps) {
  w.pod<std::uint64_t>(a.steps());
  const bool has = !a.first_moments().empty();
  w.pod<std::uint8_t>(has ? 1 : 0);
  if (!has) return;
  for (std::size_t i = 0; i < ps.size(); ++i) w.array("m:" + ps[i].name, a.first_moments()[i]);
  for (std::size_t i = 0; i < ps.size(); ++i) w.array("v:" + ps[i].name, a.second_moments()[i]);
}

inline void read_params(Reader& r, std::vector<Parameter>& ps) {
  if (r.pod<std::uint32_t>() != ps.size()) r.fail("parameter count does not match the configured model");
  for (auto& p : ps) {
    p.value = r.array(p.name, p.value.shape());
    p.zero_grad();
  }
}

inline void read_adam(Reader& r, Adam& a, const std::vector<Parameter>& ps) {
  const auto t = r.pod<std::uint64_t>();
  std::vector<Tensor> m, v;
  if (r.pod<std::uint8_t>() != 0) {
    for (const auto& p : ps) m.push_back(r.array("m:" + p.name, p.value.shape()));
    for (const auto& p : ps) v.push_back(r.array("v:" + p.name, p.value.shape()));
  }
  a.restore(t, std::move(m), std::move(v));
}

inline std::uint32_t crc32_of(const char* data, std::size_t n) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32_z(crc, reinterpret_cast<const Bytef*>(data), n);
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

// Layout (little-endian): magic[8], u32 version, config text, u64 epochs_done,
// u64 steps_done, u64 unstable_streak, G params, D params, G Adam, D Adam,
// latent rng, shuffle rng, history, u32 CRC-32 of everything before it.
inline std::string serialize_checkpoint(const Trainer& t) {
  detail::Writer w;
  w.bytes.append(kCheckpointMagic, 8);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.str(format_train_config(t.config()));
  w.pod<std::uint64_t>(t.epochs_done);
  w.pod<std::uint64_t>(t.steps_done);
  w.pod<std::uint64_t>(t.unstable_streak);
  detail::write_params(w, t.generator().parameters());
  detail::write_params(w, t.discriminator().parameters());
  detail::write_adam(w, t.g_optimizer(), t.generator().parameters());
  detail::write_adam(w, t.d_optimizer(), t.discriminator().parameters());
  w.str(t.latent_rng().serialize());
  w.str(t.shuffle_rng().serialize());
  w.pod<std::uint64_t>(t.history.size());
  for (const auto& h : t.history) {
    w.pod<std::uint64_t>(h.epoch);
    for (double v : {h.d_loss_real, h.d_loss_fake, h.g_adv, h.g_l1, h.heldout_l1, h.heldout_segsnr}) w.pod(v);
  }
  w.pod<std::uint32_t>(detail::crc32_of(w.bytes.data(), w.bytes.size()));
  return w.bytes;
}

inline Trainer deserialize_checkpoint(const std::string& bytes, const std::string& origin = "checkpoint") {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw DataError(origin + ": not a checkpoint (bad magic)");
  }
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + 8, 4);
  if (version != kCheckpointVersion) {
    throw DataError(origin + ": checkpoint format version " + std::to_string(version) + ", this build reads version " +
                    std::to_string(kCheckpointVersion));
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body, 4);
  if (stored != detail::crc32_of(bytes.data(), body)) throw DataError(origin + ": checksum mismatch (corrupted file)");

  detail::Reader r(bytes, body, origin);
  r.seek(12);
  TrainConfig cfg;
  try {
    cfg = parse_train_config(r.str(), origin + " (embedded config)");
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  Trainer t(cfg);
  t.epochs_done = r.pod<std::uint64_t>();
  t.steps_done = r.pod<std::uint64_t>();
  t.unstable_streak = r.pod<std::uint64_t>();
  detail::read_params(r, t.generator().parameters());
  detail::read_params(r, t.discriminator().parameters());
  detail::read_adam(r, t.g_optimizer(), t.generator().parameters());
  detail::read_adam(r, t.d_optimizer(), t.discriminator().parameters());
  t.latent_rng().deserialize(r.str());
  t.shuffle_rng().deserialize(r.str());
  const auto n_hist = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < n_hist; ++i) {
    HistoryRow h;
    h.epoch = r.pod<std::uint64_t>();
    for (double* v : {&h.d_loss_real, &h.d_loss_fake, &h.g_adv, &h.g_l1, &h.heldout_l1, &h.heldout_segsnr})
      *v = r.pod<double>();
    t.history.push_back(h);
  }
  if (!r.done()) r.fail("trailing bytes after history");
  return t;
}

inline void save_checkpoint(const std::filesystem::path& path, const Trainer& t) {
  detail::write_file_atomic(path, serialize_checkpoint(t));
}

inline Trainer load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(detail::read_file(path), path.string());
}

}  // namespace wge
