#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "htmsp/config.hpp"
#include "htmsp/errors.hpp"
#include "htmsp/imaging.hpp"

// Flat key-value run configuration: one `key = value` per line, `#` comments.
// Unknown keys are rejected. Values feed SpConfig and TilingSpec plus the
// harness knobs (resize, trials).
namespace htmsp {

struct RunConfig {
  SpConfig sp;
  TilingSpec tiling;
  int resize_h = 64;  // 0 keeps source resolution
  int resize_w = 64;
  int trials = 10;

  void validate() const {
    sp.validate();
    tiling.validate();
    if (resize_h < 0 || resize_w < 0)
      throw ConfigError("resize_h/resize_w must be >= 0, got " + std::to_string(resize_h) + "x" +
                        std::to_string(resize_w));
    if ((resize_h == 0) != (resize_w == 0))
      throw ConfigError("resize_h and resize_w must be zero together or positive together");
    if (trials < 1) throw ConfigError("trials must be >= 1, got " + std::to_string(trials));
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

template <typename T, typename Parser>
T parse_number(const std::string& key, const std::string& value, Parser parser) {
  try {
    std::size_t used = 0;
    const T parsed = parser(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& value) {
  return parse_number<int>(key, value,
                           [](const std::string& v, std::size_t* used) { return std::stoi(v, used); });
}

inline double parse_double(const std::string& key, const std::string& value) {
  return parse_number<double>(
      key, value, [](const std::string& v, std::size_t* used) { return std::stod(v, used); });
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  return parse_number<std::uint64_t>(key, value, [](const std::string& v, std::size_t* used) {
    return std::stoull(v, used);
  });
}

}  // namespace detail

inline InitMode parse_init_mode(const std::string& value) {
  if (value == "random" || value == "random_weight") return InitMode::kRandomWeight;
  if (value == "rule" || value == "rule_based") return InitMode::kRuleBased;
  throw ConfigError("invalid value '" + value +
                    "' for key 'init_mode' (expected random_weight or rule_based)");
}

inline InhibitMode parse_inhibit_mode(const std::string& value) {
  if (value == "percentile") return InhibitMode::kPercentile;
  if (value == "mean") return InhibitMode::kMean;
  throw ConfigError("invalid value '" + value +
                    "' for key 'inhibit_mode' (expected percentile or mean)");
}

inline void apply_config_entry(RunConfig& config, const std::string& key,
                               const std::string& value) {
  if (key == "init_mode") {
    config.sp.init_mode = parse_init_mode(value);
  } else if (key == "inhibit_mode") {
    config.sp.inhibit_mode = parse_inhibit_mode(value);
  } else if (key == "block_h") {
    config.tiling.block_h = detail::parse_int(key, value);
  } else if (key == "block_w") {
    config.tiling.block_w = detail::parse_int(key, value);
  } else if (key == "region_h") {
    config.tiling.region_h = detail::parse_int(key, value);
  } else if (key == "region_w") {
    config.tiling.region_w = detail::parse_int(key, value);
  } else if (key == "neighborhood") {
    config.tiling.neighborhood = detail::parse_int(key, value);
  } else if (key == "gamma") {
    config.sp.gamma = detail::parse_int(key, value);
  } else if (key == "rho") {
    config.sp.rho = detail::parse_double(key, value);
  } else if (key == "theta_c") {
    config.sp.theta_c = detail::parse_double(key, value);
  } else if (key == "theta_s") {
    config.sp.theta_s = detail::parse_double(key, value);
  } else if (key == "s") {
    config.sp.s = detail::parse_double(key, value);
  } else if (key == "phi") {
    config.sp.phi = detail::parse_double(key, value);
  } else if (key == "eta") {
    config.sp.eta = detail::parse_double(key, value);
  } else if (key == "big_t") {
    config.sp.avg_window = detail::parse_int(key, value);
  } else if (key == "perm_delta") {
    config.sp.perm_delta = detail::parse_double(key, value);
  } else if (key == "seed") {
    config.sp.seed = detail::parse_u64(key, value);
  } else if (key == "resize_h") {
    config.resize_h = detail::parse_int(key, value);
  } else if (key == "resize_w") {
    config.resize_w = detail::parse_int(key, value);
  } else if (key == "trials") {
    config.trials = detail::parse_int(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' at " + path.string() + ":" +
                        std::to_string(line_no));
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value = detail::trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("expected 'key = value' at " + path.string() + ":" +
                        std::to_string(line_no));
    apply_config_entry(config, key, value);
  }
  return config;
}

}  // namespace htmsp
