/* Copyright 2026 The MMCM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "mmcm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mmcm/error.hpp"

namespace mmcm {
namespace {

enum class Type { kString, kInt, kU64, kDouble, kBool, kInts, kDoubles, kStrings };

struct Key {
  const char* name;
  Type type;
  const char* fallback;  // empty: preset dependent or unset
  const char* help;
};

// clang-format off
const Key kKeys[] = {
    {"preset", Type::kString, "synthetic", "h36m | amass | synthetic"},
    {"past_frames", Type::kInt, "", "B, observed frames"},
    {"future_frames", Type::kInt, "", "T, predicted frames"},
    {"past_tail_frames", Type::kInt, "5", "N'_p, past frames prepended to each embedded future"},
    {"window_stride", Type::kInt, "0", "Stage-1 mining stride, 0 = T/4"},
    {"encoder_epochs", Type::kInt, "12", ""},
    {"encoder_learning_rate", Type::kDouble, "0.001", ""},
    {"encoder_batch_size", Type::kInt, "64", ""},
    {"encoder_widths", Type::kInts, "512,128,64", "encoder widths ending with the code width"},
    {"layout_dims", Type::kInt, "2", ""},
    {"layout_neighbors", Type::kInt, "15", ""},
    {"layout_min_dist", Type::kDouble, "0.1", ""},
    {"layout_spread", Type::kDouble, "1.0", ""},
    {"layout_epochs", Type::kInt, "200", ""},
    {"layout_negative_rate", Type::kInt, "5", ""},
    {"layout_learning_rate", Type::kDouble, "1.0", ""},
    {"transform_epochs", Type::kInt, "30", ""},
    {"min_cluster_size", Type::kInt, "", "15 (h36m, synthetic) or 50 (amass)"},
    {"min_samples", Type::kInt, "1", ""},
    {"mmgt_threshold", Type::kDouble, "", "0.5 (h36m), 0.4 (amass) or 0.1 (synthetic), meters"},
    {"mmgt_past_window", Type::kInt, "1", "trailing past frames compared when mining MMGTs"},
    {"mmgt_include_self", Type::kBool, "true", ""},
    {"tau_margin", Type::kDouble, "0.1", ""},
    {"calibration_stride", Type::kInt, "1", ""},
    {"seed", Type::kU64, "0", ""},
    {"threads", Type::kInt, "0", "0 = all available cores"},
    {"families", Type::kStrings, "walk-cycle,sit-down,stand-turn,arm-wave,crouch", ""},
    {"tracks_per_family", Type::kInt, "20", ""},
    {"track_length", Type::kInt, "120", ""},
    {"frame_rate", Type::kDouble, "25", ""},
    {"sensor_noise", Type::kDouble, "0.003", ""},
    {"corpus", Type::kString, "", "corpus file"},
    {"pipeline", Type::kString, "", "fitted pipeline file"},
    {"predictions", Type::kStrings, "", "prediction files"},
    {"out", Type::kString, "", "output directory or file"},
    {"eval_samples", Type::kInt, "100", "test motions drawn from the corpus"},
    {"allow_fingerprint_mismatch", Type::kBool, "false", ""},
    {"perturb_kind", Type::kString, "all", "joint_noise | bone_scale | mismatch | rare_mode_removal | noisy_addition | all"},
    {"noise_grid", Type::kDoubles, "0,0.02,0.05,0.1,0.2,0.5", "meters"},
    {"bone_factors", Type::kDoubles, "1,1.25,1.5,2", ""},
    {"bones_per_future", Type::kInt, "2", ""},
    {"mismatch_edges", Type::kDoubles, "0,0.1,0.25,0.5,1", "meters"},
    {"per_bucket", Type::kInt, "10", ""},
    {"removal_grid", Type::kDoubles, "0,5,10,15,20,25,30", "percent"},
    {"addition_counts", Type::kInts, "0,5,10,20,40", ""},
    {"addition_sigma", Type::kDouble, "0.5", "meters"},
    {"surrogate_top_modes", Type::kInt, "0", "0 = every valid mode"},
    {"predictions_per_sample", Type::kInt, "50", "I"},
    {"sweep_dims", Type::kInts, "2,3,5", ""},
    {"sweep_min_cluster_sizes", Type::kInts, "10,15,30", ""},
    {"sweep_min_samples", Type::kInts, "1,5", ""},
};
// clang-format on

const Key* find_key(std::string_view name) {
  for (const auto& k : kKeys) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_int(std::string_view s, long long& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    out = false;
    return true;
  }
  return false;
}

void check_value(const Key& k, const std::string& v) {
  auto bad = [&](const char* what) {
    throw ConfigError("config key '" + std::string(k.name) + "': '" + v + "' is not " + what);
  };
  long long i = 0;
  double d = 0.0;
  bool b = false;
  std::uint64_t u = 0;
  switch (k.type) {
    case Type::kString:
      break;
    case Type::kInt:
      if (!parse_int(v, i) || i < -2147483647LL || i > 2147483647LL) bad("an integer");
      break;
    case Type::kU64:
      if (!parse_u64(v, u)) bad("an unsigned integer");
      break;
    case Type::kDouble:
      if (!parse_double(v, d)) bad("a finite number");
      break;
    case Type::kBool:
      if (!parse_bool(v, b)) bad("a boolean");
      break;
    case Type::kInts:
      for (const auto& item : split(v)) {
        if (!parse_int(item, i)) bad("a comma-separated integer list");
      }
      break;
    case Type::kDoubles:
      for (const auto& item : split(v)) {
        if (!parse_double(item, d)) bad("a comma-separated number list");
      }
      break;
    case Type::kStrings:
      break;
  }
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  RunConfig c;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    try {
      c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return c;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + std::string(key) + "'");
  std::string v = trim(value);
  check_value(*k, v);
  values_[std::string(key)] = std::move(v);
}

bool RunConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string RunConfig::raw(std::string_view key) const {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + std::string(key) + "'");
  const auto it = values_.find(key);
  return it != values_.end() ? it->second : std::string(k->fallback);
}

std::string RunConfig::get_string(std::string_view key) const { return raw(key); }

int RunConfig::get_int(std::string_view key) const {
  long long v = 0;
  const std::string s = raw(key);
  if (!parse_int(s, v)) throw ConfigError("config key '" + std::string(key) + "' has no integer value");
  return static_cast<int>(v);
}

double RunConfig::get_double(std::string_view key) const {
  double v = 0.0;
  if (!parse_double(raw(key), v)) throw ConfigError("config key '" + std::string(key) + "' has no numeric value");
  return v;
}

bool RunConfig::get_bool(std::string_view key) const {
  bool v = false;
  if (!parse_bool(raw(key), v)) throw ConfigError("config key '" + std::string(key) + "' has no boolean value");
  return v;
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  std::uint64_t v = 0;
  if (!parse_u64(raw(key), v)) throw ConfigError("config key '" + std::string(key) + "' has no integer value");
  return v;
}

std::vector<int> RunConfig::get_ints(std::string_view key) const {
  std::vector<int> out;
  for (const auto& s : split(raw(key))) {
    long long v = 0;
    parse_int(s, v);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<double> RunConfig::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (const auto& s : split(raw(key))) {
    double v = 0.0;
    parse_double(s, v);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> RunConfig::get_strings(std::string_view key) const { return split(raw(key)); }

PipelineConfig RunConfig::pipeline_config() const {
  const std::string preset = get_string("preset");
  PipelineConfig c;
  try {
    c = PipelineConfig::for_preset(preset);
  } catch (const InvalidArgument&) {
    throw ConfigError("config key 'preset': unknown preset '" + preset + "'");
  }
  if (has("past_frames")) c.past_frames = get_int("past_frames");
  if (has("future_frames")) c.future_frames = get_int("future_frames");
  c.window.past_tail_frames = get_int("past_tail_frames");
  c.window.stride = get_int("window_stride");
  c.window.future_frames = c.future_frames;
  c.encoder.epochs = get_int("encoder_epochs");
  c.encoder.learning_rate = get_double("encoder_learning_rate");
  c.encoder.batch_size = get_int("encoder_batch_size");
  c.encoder.widths = get_ints("encoder_widths");
  c.layout.dims = get_int("layout_dims");
  c.layout.n_neighbors = get_int("layout_neighbors");
  c.layout.min_dist = get_double("layout_min_dist");
  c.layout.spread = get_double("layout_spread");
  c.layout.epochs = get_int("layout_epochs");
  c.layout.negative_sample_rate = get_int("layout_negative_rate");
  c.layout.learning_rate = get_double("layout_learning_rate");
  c.layout.transform_epochs = get_int("transform_epochs");
  if (has("min_cluster_size")) c.cluster.min_cluster_size = get_int("min_cluster_size");
  c.cluster.min_samples = get_int("min_samples");
  if (has("mmgt_threshold")) c.mmgt.similarity_threshold = get_double("mmgt_threshold");
  c.mmgt.past_window_frames = get_int("mmgt_past_window");
  c.mmgt.include_self = get_bool("mmgt_include_self");
  c.tau_margin = get_double("tau_margin");
  c.calibration_stride = get_int("calibration_stride");
  c.seed = get_u64("seed");
  return c;
}

SyntheticOptions RunConfig::synthetic_options() const {
  SyntheticOptions o;
  o.tracks_per_family = get_int("tracks_per_family");
  o.track_length = get_int("track_length");
  o.frame_rate = get_double("frame_rate");
  o.sensor_noise = get_double("sensor_noise");
  const PipelineConfig p = pipeline_config();
  o.min_track_length = p.past_frames + p.future_frames;
  return o;
}

std::vector<SyntheticMotionSpec> RunConfig::family_specs() const {
  const auto defaults = default_family_specs();
  std::vector<SyntheticMotionSpec> out;
  for (const auto& name : get_strings("families")) {
    MotionFamily f;
    try {
      f = parse_family(name);
    } catch (const InvalidArgument&) {
      throw ConfigError("config key 'families': invalid motion family '" + name + "'");
    }
    for (const auto& d : defaults) {
      if (d.family == f) out.push_back(d);
    }
  }
  if (out.empty()) throw ConfigError("config key 'families': no family given");
  return out;
}

std::vector<SweepGridPoint> RunConfig::sweep_grid() const {
  std::vector<SweepGridPoint> grid;
  for (int d : get_ints("sweep_dims")) {
    for (int m : get_ints("sweep_min_cluster_sizes")) {
      for (int s : get_ints("sweep_min_samples")) grid.push_back({d, {m, s}});
    }
  }
  return grid;
}

void RunConfig::validate() const {
  pipeline_config().validate();
  auto require = [&](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError("config key '" + std::string(key) + "' " + what);
  };
  require(get_int("threads") >= 0, "threads", "must be >= 0");
  require(get_int("tracks_per_family") >= 1, "tracks_per_family", "must be >= 1");
  const PipelineConfig p = pipeline_config();
  require(get_int("track_length") >= p.past_frames + p.future_frames, "track_length",
          "must hold at least B + T frames");
  require(get_double("frame_rate") > 0.0, "frame_rate", "must be positive");
  require(get_double("sensor_noise") >= 0.0, "sensor_noise", "must be >= 0");
  require(get_int("eval_samples") >= 1, "eval_samples", "must be >= 1");
  require(get_int("bones_per_future") >= 1, "bones_per_future", "must be >= 1");
  require(get_int("per_bucket") >= 1, "per_bucket", "must be >= 1");
  require(get_double("addition_sigma") >= 0.0, "addition_sigma", "must be >= 0");
  require(get_int("surrogate_top_modes") >= 0, "surrogate_top_modes", "must be >= 0");
  require(get_int("predictions_per_sample") >= 1, "predictions_per_sample", "must be >= 1");
  const std::string kind = get_string("perturb_kind");
  require(kind == "joint_noise" || kind == "bone_scale" || kind == "mismatch" ||
              kind == "rare_mode_removal" || kind == "noisy_addition" || kind == "all",
          "perturb_kind", "is not a known perturbation");
  auto increasing = [&](const std::vector<double>& v, const char* key) {
    require(!v.empty(), key, "must not be empty");
    for (std::size_t i = 1; i < v.size(); ++i) require(v[i] > v[i - 1], key, "must be strictly increasing");
    require(v.front() >= 0.0, key, "must be non-negative");
  };
  increasing(get_doubles("noise_grid"), "noise_grid");
  increasing(get_doubles("bone_factors"), "bone_factors");
  require(get_doubles("bone_factors").front() > 0.0, "bone_factors", "must be positive");
  increasing(get_doubles("mismatch_edges"), "mismatch_edges");
  increasing(get_doubles("removal_grid"), "removal_grid");
  std::vector<double> counts;
  for (int c : get_ints("addition_counts")) counts.push_back(c);
  increasing(counts, "addition_counts");
  for (const char* key : {"sweep_dims", "sweep_min_cluster_sizes", "sweep_min_samples"}) {
    const auto v = get_ints(key);
    require(!v.empty(), key, "must not be empty");
  }
  for (int d : get_ints("sweep_dims")) require(d >= 1, "sweep_dims", "entries must be >= 1");
  for (int m : get_ints("sweep_min_cluster_sizes")) require(m >= 2, "sweep_min_cluster_sizes", "entries must be >= 2");
  for (int s : get_ints("sweep_min_samples")) require(s >= 1, "sweep_min_samples", "entries must be >= 1");
  family_specs();
}

const std::vector<std::pair<std::string, std::string>>& RunConfig::known_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : kKeys) {
      std::string d = k.fallback;
      if (*k.help) d += d.empty() ? k.help : std::string("  (") + k.help + ")";
      out.emplace_back(k.name, d);
    }
    return out;
  }();
  return keys;
}

}  // namespace mmcm
