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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mmcm/perturb.hpp"
#include "mmcm/pipeline.hpp"
#include "mmcm/synthetic.hpp"

namespace mmcm {

// Plain-text key=value run configuration. Lines may carry '#' comments.
// Every key is checked against the known key table when set; values are
// checked against module invariants by validate().
class RunConfig {
 public:
  static RunConfig from_file(const std::filesystem::path& path);

  // Throws ConfigError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  bool has(std::string_view key) const;

  std::string get_string(std::string_view key) const;
  int get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  std::vector<int> get_ints(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;
  std::vector<std::string> get_strings(std::string_view key) const;

  // Preset defaults overridden by explicit keys.
  PipelineConfig pipeline_config() const;
  SyntheticOptions synthetic_options() const;
  std::vector<SyntheticMotionSpec> family_specs() const;
  std::vector<SweepGridPoint> sweep_grid() const;

  // Validates every value; errors name the offending key.
  void validate() const;

  // Known keys with their defaults, for --help output.
  static const std::vector<std::pair<std::string, std::string>>& known_keys();

 private:
  std::string raw(std::string_view key) const;
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace mmcm
