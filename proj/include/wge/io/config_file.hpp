#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wge/core/error.hpp"
#include "wge/io/wav.hpp"
#include "wge/train/config.hpp"

namespace wge {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

struct ConfigKey {
  const char* name;
  const char* help;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
  using C = TrainConfig;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    auto real = [&](const char* name, const char* help, double C::*field) {
      k.push_back({name, help, [=](C& c, const std::string& v) { c.*field = parse_double(name, v); },
                   [=](const C& c) { return fmt_double(c.*field); }});
    };
    auto count = [&](const char* name, const char* help, std::size_t C::*field) {
      k.push_back({name, help, [=](C& c, const std::string& v) { c.*field = parse_uint(name, v); },
                   [=](const C& c) { return std::to_string(c.*field); }});
    };
    auto flag = [&](const char* name, const char* help, bool VariantFlags::*field) {
      k.push_back({name, help, [=](C& c, const std::string& v) { c.model.flags.*field = parse_bool(name, v); },
                   [=](const C& c) { return std::string(c.model.flags.*field ? "true" : "false"); }});
    };
    auto mreal = [&](const char* name, const char* help, double ModelConfig::*field) {
      k.push_back({name, help, [=](C& c, const std::string& v) { c.model.*field = parse_double(name, v); },
                   [=](const C& c) { return fmt_double(c.model.*field); }});
    };
    auto mcount = [&](const char* name, const char* help, std::size_t ModelConfig::*field) {
      k.push_back({name, help, [=](C& c, const std::string& v) { c.model.*field = parse_uint(name, v); },
                   [=](const C& c) { return std::to_string(c.model.*field); }});
    };
    k.push_back({"seed", "root seed; every random stream is a named sub-seed of it (default 1234)",
                 [](C& c, const std::string& v) { c.seed = parse_uint("seed", v); },
                 [](const C& c) { return std::to_string(c.seed); }});
    count("epochs", "training epochs (paper 80, desk 200)", &C::epochs);
    count("batch_size", "frames per step (paper 100, desk 8)", &C::batch_size);
    real("lambda_l1", "weight of the L1 term in the generator loss (default 100)", &C::lambda_l1);
    real("lr", "Adam learning rate (default 0.0002)", &C::lr);
    real("beta1", "Adam beta1 (default 0.5)", &C::beta1);
    real("beta2", "Adam beta2 (default 0.999)", &C::beta2);
    real("adam_eps", "Adam epsilon (default 1e-8)", &C::adam_eps);
    real("smoothing", "real-sample target when labsmth is on (default 0.9)", &C::smoothing_value);
    k.push_back({"d_two_steps", "split the D update into a real step and a fake step (default false)",
                 [](C& c, const std::string& v) { c.d_two_steps = parse_bool("d_two_steps", v); },
                 [](const C& c) { return std::string(c.d_two_steps ? "true" : "false"); }});
    real("score_limit", "|D score| counted as exploding above this (default 1e6)", &C::score_limit);
    count("score_patience", "consecutive exploding steps before abort (default 10)", &C::score_patience);
    flag("in", "instance normalization in D (default true)", &VariantFlags::instance_norm);
    flag("labsmth", "one-sided label smoothing (default true)", &VariantFlags::label_smoothing);
    flag("gt", "gammatone-initialized first layers (default false)", &VariantFlags::gt_layer);
    flag("preem", "trainable pre-emphasis layer in G (default false)", &VariantFlags::preemph_layer);
    flag("latent", "latent z at the bottleneck (default true)", &VariantFlags::latent);
    k.push_back({"feature_maps", "comma-separated channels per encoder layer",
                 [](C& c, const std::string& v) {
                   std::vector<std::size_t> fm;
                   std::stringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ',')) fm.push_back(parse_uint("feature_maps", trim(item)));
                   c.model.feature_maps = fm;
                 },
                 [](const C& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.model.feature_maps.size(); ++i)
                     s += (i ? "," : "") + std::to_string(c.model.feature_maps[i]);
                   return s;
                 }});
    mcount("filter_width", "conv width (default 31)", &ModelConfig::filter_width);
    mcount("stride", "conv stride (default 2)", &ModelConfig::stride);
    mcount("input_length", "frame length in samples (paper 16384, desk 1024)", &ModelConfig::input_length);
    mreal("gt_f_low", "lowest gammatone center frequency, Hz (default 1200)", &ModelConfig::gt_f_low);
    mreal("gt_f_high", "highest gammatone center frequency, Hz (default 7600)", &ModelConfig::gt_f_high);
    k.push_back({"gt_trainable", "gammatone layers stay trainable (default true)",
                 [](C& c, const std::string& v) { c.model.gt_trainable = parse_bool("gt_trainable", v); },
                 [](const C& c) { return std::string(c.model.gt_trainable ? "true" : "false"); }});
    mreal("preemph_alpha", "pre-emphasis coefficient (default 0.95)", &ModelConfig::preemph_alpha);
    k.push_back({"leaky_slope", "D LeakyReLU slope (default 0.3)",
                 [](C& c, const std::string& v) { c.model.leaky_slope = static_cast<float>(parse_double("leaky_slope", v)); },
                 [](const C& c) { return fmt_double(c.model.leaky_slope); }});
    mreal("norm_eps", "instance norm epsilon (default 1e-5)", &ModelConfig::norm_eps);
    mreal("init_stddev", "truncated-normal init std (default 0.02)", &ModelConfig::init_stddev);
    return k;
  }();
  return keys;
}

}  // namespace detail

// `key = value` lines, '#' comments. `scale = desk|paper` selects the preset
// the other keys override, wherever it appears. Unknown keys are errors.
inline TrainConfig parse_train_config(const std::string& text, const std::string& origin = "config") {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string scale = "paper";
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "scale") {
      if (value != "desk" && value != "paper") throw ConfigError(origin + ": scale must be desk or paper");
      scale = value;
      continue;
    }
    entries.emplace_back(key, value);
  }
  TrainConfig c = scale == "desk" ? TrainConfig::desk() : TrainConfig{};
  for (const auto& [key, value] : entries) {
    bool found = false;
    for (const auto& k : detail::config_keys()) {
      if (key == k.name) {
        k.set(c, value);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError(origin + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

inline TrainConfig load_train_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_train_config(text, path.string());
}

// Every key, one per line, in a fixed order; parse_train_config inverts it.
inline std::string format_train_config(const TrainConfig& c) {
  std::string out;
  for (const auto& k : detail::config_keys()) out += std::string(k.name) + " = " + k.get(c) + "\n";
  return out;
}

inline std::string config_help() {
  std::string out = "  scale = desk|paper   preset applied before the other keys (default paper)\n";
  for (const auto& k : detail::config_keys()) out += "  " + std::string(k.name) + "   " + k.help + "\n";
  return out;
}

}  // namespace wge
