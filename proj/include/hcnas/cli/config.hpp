// Copyright 2026 The hcnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hcnas/data/dataset.hpp"
#include "hcnas/search/search.hpp"

namespace hcnas::cli {

struct DatasetConfig {
  std::string kind = "synthetic";  // synthetic | mnist | cifar10
  std::string data_dir;
  std::size_t train_limit = 0;  // 0 keeps every training sample
  data::SyntheticSpec synthetic;
  friend bool operator==(const DatasetConfig& a, const DatasetConfig& b);
};

struct RunConfig {
  search::SearchConfig search;
  DatasetConfig dataset;
  bool save_children = false;  // write every morphed child before training
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Every recognized key, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key. Throws ConfigError on unknown keys or unparsable values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

/// Flat `key = value` lines; `#` starts a comment. Unknown keys and
/// repeated keys are errors.
RunConfig parse_config(std::string_view text, RunConfig base = {});
/// Applies HCNAS_<KEY> variables (key upper-cased) found through `getenv`.
void apply_env_overrides(RunConfig& cfg, const std::function<const char*(const char*)>& getenv_fn);
/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& cfg);

/// Loads the dataset the config describes.
data::Dataset load_dataset(const DatasetConfig& cfg);

}  // namespace hcnas::cli
