#ifndef MBTREE_CONFIG_HPP
#define MBTREE_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mbtree {

// Tool-wide defaults; command-line flags override config-file values, which
// override these initializers.
struct Config {
  uint32_t max_level{10};
  double alpha{0.3};
  double beta{0.7};
  double theta{2048};
  double rt_clamp{1e3};
  double udp_timeout{300};
  std::string stoplist_path;
  std::vector<std::string> internal_prefixes;
  unsigned jobs{0};  // 0: use available parallelism
};

// Flat key=value file; blank lines and # comments ignored. `internal` may be
// given multiple times or comma-separated.
inline void load_config_file(const std::string& path, Config& cfg) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::string line;
  size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError(path + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(f, line)) {
    ++lineno;
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) fail("empty key or value");

    auto as_double = [&](double lo, double hi) {
      try {
        size_t used = 0;
        double v = std::stod(val, &used);
        if (used != val.size() || v < lo || v > hi) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        fail("bad value '" + val + "' for " + key);
        return 0.0;
      }
    };
    auto as_uint = [&](unsigned long hi) {
      try {
        size_t used = 0;
        unsigned long v = std::stoul(val, &used);
        if (used != val.size() || v > hi) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        fail("bad value '" + val + "' for " + key);
        return 0ul;
      }
    };

    if (key == "max_level")
      cfg.max_level = uint32_t(as_uint(64));
    else if (key == "alpha")
      cfg.alpha = as_double(0, 1);
    else if (key == "beta")
      cfg.beta = as_double(0, 1);
    else if (key == "theta")
      cfg.theta = as_double(1e-300, 1e300);
    else if (key == "rt_clamp")
      cfg.rt_clamp = as_double(1, 1e12);
    else if (key == "udp_timeout")
      cfg.udp_timeout = as_double(0, 1e9);
    else if (key == "stoplist")
      cfg.stoplist_path = val;
    else if (key == "jobs")
      cfg.jobs = unsigned(as_uint(4096));
    else if (key == "internal") {
      std::stringstream ss(val);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) cfg.internal_prefixes.push_back(item);
    } else {
      fail("unknown config key '" + key + "'");
    }
  }
}

}  // namespace mbtree

#endif  // MBTREE_CONFIG_HPP
