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

#include "hcnas/cli/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

#include "hcnas/errors.hpp"

namespace hcnas::cli {

bool operator==(const DatasetConfig& a, const DatasetConfig& b) {
  const auto& x = a.synthetic;
  const auto& y = b.synthetic;
  return a.kind == b.kind && a.data_dir == b.data_dir && a.train_limit == b.train_limit &&
         x.classes == y.classes && x.train_size == y.train_size && x.test_size == y.test_size &&
         x.image_dim == y.image_dim && x.channels == y.channels && x.amplitude == y.amplitude &&
         x.noise == y.noise && x.seed == y.seed;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* want) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " + want);
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* key;
  void (*set)(RunConfig&, std::string_view key, std::string_view value);
  std::string (*get)(const RunConfig&);
};

#define HCNAS_SIZE_FIELD(name, expr)                                                                     \
  Field {                                                                                                \
    name, [](RunConfig& c, std::string_view k, std::string_view v) { expr = parse_unsigned<std::size_t>(k, v); }, \
        [](const RunConfig& c) { return std::to_string(expr); }                                          \
  }
#define HCNAS_DOUBLE_FIELD(name, expr)                                                                   \
  Field {                                                                                                \
    name, [](RunConfig& c, std::string_view k, std::string_view v) { expr = parse_double(k, v); },       \
        [](const RunConfig& c) { return fmt_double(expr); }                                              \
  }
#define HCNAS_BOOL_FIELD(name, expr)                                                                     \
  Field {                                                                                                \
    name, [](RunConfig& c, std::string_view k, std::string_view v) { expr = parse_bool(k, v); },         \
        [](const RunConfig& c) { return std::string(fmt_bool(expr)); }                                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      HCNAS_SIZE_FIELD("n_steps", c.search.n_steps),
      HCNAS_SIZE_FIELD("n_nm", c.search.n_nm),
      HCNAS_SIZE_FIELD("n_neigh", c.search.n_neigh),
      HCNAS_SIZE_FIELD("epoch_neigh", c.search.epoch_neigh),
      HCNAS_SIZE_FIELD("epoch_final", c.search.epoch_final),
      HCNAS_DOUBLE_FIELD("lambda_start", c.search.lambda_start),
      HCNAS_DOUBLE_FIELD("lambda_end", c.search.lambda_end),
      Field{"init_mode",
            [](RunConfig& c, std::string_view k, std::string_view v) {
              if (v == "default") {
                c.search.init_mode = morph::InitMode::Default;
              } else if (v == "zero_one") {
                c.search.init_mode = morph::InitMode::ZeroOne;
              } else {
                bad_value(k, v, "'default' or 'zero_one'");
              }
            },
            [](const RunConfig& c) {
              return std::string(c.search.init_mode == morph::InitMode::ZeroOne ? "zero_one" : "default");
            }},
      HCNAS_BOOL_FIELD("gradient_stopping", c.search.gradient_stopping),
      HCNAS_SIZE_FIELD("batch_size", c.search.batch_size),
      HCNAS_DOUBLE_FIELD("momentum", c.search.momentum),
      HCNAS_DOUBLE_FIELD("val_fraction", c.search.val_fraction),
      Field{"rng_seed",
            [](RunConfig& c, std::string_view k, std::string_view v) {
              c.search.rng_seed = parse_unsigned<std::uint64_t>(k, v);
            },
            [](const RunConfig& c) { return std::to_string(c.search.rng_seed); }},
      HCNAS_SIZE_FIELD("fc_width", c.search.fc_width),
      Field{"select_by",
            [](RunConfig& c, std::string_view k, std::string_view v) {
              if (v == "accuracy") {
                c.search.select_by = search::SelectBy::Accuracy;
              } else if (v == "loss") {
                c.search.select_by = search::SelectBy::Loss;
              } else {
                bad_value(k, v, "'accuracy' or 'loss'");
              }
            },
            [](const RunConfig& c) {
              return std::string(c.search.select_by == search::SelectBy::Loss ? "loss" : "accuracy");
            }},
      HCNAS_BOOL_FIELD("strict_fc_cap", c.search.strict_fc_cap),
      HCNAS_DOUBLE_FIELD("aging_spread", c.search.aging_spread),
      HCNAS_SIZE_FIELD("aging_cutoff", c.search.aging_cutoff),
      HCNAS_SIZE_FIELD("jobs", c.search.jobs),
      Field{"dataset",
            [](RunConfig& c, std::string_view k, std::string_view v) {
              if (v != "synthetic" && v != "mnist" && v != "cifar10") bad_value(k, v, "synthetic, mnist or cifar10");
              c.dataset.kind = std::string(v);
            },
            [](const RunConfig& c) { return c.dataset.kind; }},
      Field{"data_dir", [](RunConfig& c, std::string_view, std::string_view v) { c.dataset.data_dir = std::string(v); },
            [](const RunConfig& c) { return c.dataset.data_dir; }},
      HCNAS_SIZE_FIELD("train_limit", c.dataset.train_limit),
      HCNAS_SIZE_FIELD("synthetic_classes", c.dataset.synthetic.classes),
      HCNAS_SIZE_FIELD("synthetic_train", c.dataset.synthetic.train_size),
      HCNAS_SIZE_FIELD("synthetic_test", c.dataset.synthetic.test_size),
      HCNAS_SIZE_FIELD("synthetic_dim", c.dataset.synthetic.image_dim),
      HCNAS_SIZE_FIELD("synthetic_channels", c.dataset.synthetic.channels),
      HCNAS_DOUBLE_FIELD("synthetic_amplitude", c.dataset.synthetic.amplitude),
      HCNAS_DOUBLE_FIELD("synthetic_noise", c.dataset.synthetic.noise),
      Field{"synthetic_seed",
            [](RunConfig& c, std::string_view k, std::string_view v) {
              c.dataset.synthetic.seed = parse_unsigned<std::uint64_t>(k, v);
            },
            [](const RunConfig& c) { return std::to_string(c.dataset.synthetic.seed); }},
      HCNAS_BOOL_FIELD("save_children", c.save_children),
  };
  return table;
}

#undef HCNAS_SIZE_FIELD
#undef HCNAS_DOUBLE_FIELD
#undef HCNAS_BOOL_FIELD

const Field& field(std::string_view key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.emplace_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  field(key).set(cfg, key, trim(value));
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) { return field(key).get(cfg); }

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key + "' repeated");
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

void apply_env_overrides(RunConfig& cfg, const std::function<const char*(const char*)>& getenv_fn) {
  for (const auto& f : fields()) {
    std::string name = "HCNAS_";
    for (const char* p = f.key; *p; ++p) name += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
    if (const char* v = getenv_fn(name.c_str())) {
      try {
        f.set(cfg, f.key, trim(v));
      } catch (const ConfigError& e) {
        throw ConfigError("environment " + name + ": " + e.what());
      }
    }
  }
}

std::string to_config_text(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& f : fields()) os << f.key << " = " << f.get(cfg) << '\n';
  return os.str();
}

data::Dataset load_dataset(const DatasetConfig& cfg) {
  if (cfg.kind == "synthetic") {
    data::SyntheticSpec spec = cfg.synthetic;
    if (cfg.train_limit != 0 && cfg.train_limit < spec.train_size) spec.train_size = cfg.train_limit;
    return data::synthetic_dataset(spec);
  }
  if (cfg.data_dir.empty()) throw ConfigError("dataset '" + cfg.kind + "' needs data_dir");
  if (cfg.kind == "mnist") return data::load_mnist_dir(cfg.data_dir, cfg.train_limit);
  if (cfg.kind == "cifar10") return data::load_cifar10_dir(cfg.data_dir, cfg.train_limit);
  throw ConfigError("unknown dataset '" + cfg.kind + "'");
}

}  // namespace hcnas::cli
