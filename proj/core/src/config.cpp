// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "nocspose/errors.hpp"

namespace nocspose {

namespace {

struct Entry {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidSpec("config key " + key + ": not a number: '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw InvalidSpec("config key " + key + ": not an integer: '" + v + "'");
  }
}

#define DOUBLE_ENTRY(key_str, field)                                        \
  Entry{key_str, [](const RunConfig& c) { return fmt_double(c.field); },    \
        [](RunConfig& c, const std::string& v) {                            \
          c.field = parse_double(key_str, v);                               \
        }}
#define INT_ENTRY(key_str, field)                                           \
  Entry{key_str,                                                            \
        [](const RunConfig& c) { return std::to_string(c.field); },         \
        [](RunConfig& c, const std::string& v) {                            \
          c.field = static_cast<decltype(c.field)>(parse_int(key_str, v));  \
        }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      INT_ENTRY("ransac-iterations", ransac_iterations),
      DOUBLE_ENTRY("ransac-inlier-threshold-px", ransac_inlier_threshold_px),
      DOUBLE_ENTRY("ransac-min-inlier-ratio", ransac_min_inlier_ratio),
      INT_ENTRY("lm-max-iters", lm_max_iters),
      INT_ENTRY("pnp-stride", pnp_stride),
      DOUBLE_ENTRY("lambda-mask", lambda_mask),
      DOUBLE_ENTRY("mu-rgb", mu_rgb),
      INT_ENTRY("refine-max-iters", refine_max_iters),
      DOUBLE_ENTRY("refine-step-tolerance", refine_step_tolerance),
      DOUBLE_ENTRY("fd-epsilon", fd_epsilon),
      INT_ENTRY("refine-resolution", refine_resolution),
      INT_ENTRY("n-init", n_init),
      INT_ENTRY("image-size", image_size),
      DOUBLE_ENTRY("fov-mean-deg", fov_mean_deg),
      DOUBLE_ENTRY("fov-std-deg", fov_std_deg),
      DOUBLE_ENTRY("elevation-min-deg", elevation_min_deg),
      DOUBLE_ENTRY("elevation-max-deg", elevation_max_deg),
      DOUBLE_ENTRY("radius-min", radius_min),
      DOUBLE_ENTRY("radius-max", radius_max),
      DOUBLE_ENTRY("pp-jitter-std-px", pp_jitter_std_px),
      INT_ENTRY("supersample", supersample),
      DOUBLE_ENTRY("target-ring-radius", target_ring_radius),
      DOUBLE_ENTRY("ring-azimuth-offset-deg", ring_azimuth_offset_deg),
      DOUBLE_ENTRY("corrupt-sigma", corrupt_sigma),
      DOUBLE_ENTRY("corrupt-outlier-fraction", corrupt_outlier_fraction),
      INT_ENTRY("corrupt-erosion-px", corrupt_erosion_px),
      INT_ENTRY("eval-samples", eval_samples),
      DOUBLE_ENTRY("fscore-threshold", fscore_threshold),
      DOUBLE_ENTRY("eval-elevation-deg", eval_elevation_deg),
      DOUBLE_ENTRY("eval-radius", eval_radius),
      INT_ENTRY("seed", seed),
  };
  return table;
}

#undef DOUBLE_ENTRY
#undef INT_ENTRY

const Entry* find_entry(const std::string& key) {
  for (const auto& e : entries()) {
    if (key == e.key) return &e;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  std::sort(keys.begin(), keys.end());
  return keys;
}

void config_set(RunConfig& cfg, const std::string& key,
                const std::string& value) {
  const Entry* e = find_entry(key);
  if (!e) throw InvalidSpec("unknown config key: " + key);
  e->set(cfg, value);
}

std::string config_get(const RunConfig& cfg, const std::string& key) {
  const Entry* e = find_entry(key);
  if (!e) throw InvalidSpec("unknown config key: " + key);
  return e->get(cfg);
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw InvalidSpec(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    config_set(cfg, strip(stripped.substr(0, eq)),
               strip(stripped.substr(eq + 1)));
  }
}

void apply_config_env(RunConfig& cfg) {
  for (const auto& e : entries()) {
    std::string var = "NOCSPOSE_";
    for (const char* p = e.key; *p; ++p) {
      var += *p == '-' ? '_' : static_cast<char>(std::toupper(*p));
    }
    if (const char* value = std::getenv(var.c_str())) {
      e.set(cfg, value);
    }
  }
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (const auto& key : config_keys()) {
    out << key << " = " << config_get(cfg, key) << "\n";
  }
  return out.str();
}

void write_effective_config(const RunConfig& cfg, const std::string& dir) {
  const std::string path = dir + "/effective_config.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << echo_config(cfg);
}

}  // namespace nocspose
