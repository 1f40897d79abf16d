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


#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "hcnas/cli/app.hpp"
#include "hcnas/cli/config.hpp"
#include "hcnas/graph/serialize.hpp"
#include "json.hpp"
#include "support/helpers.hpp"

using namespace hcnas;
using namespace hcnas::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Env {
  std::map<std::string, std::string> vars;
  GetEnv fn() const {
    return [this](const char* k) -> const char* {
      auto it = vars.find(k);
      return it == vars.end() ? nullptr : it->second.c_str();
    };
  }
};

struct Result {
  int code;
  std::string out, err;
};

Result hcnas_run(std::vector<std::string> args, const Env& env = {}) {
  std::ostringstream out, err;
  const int code = run(args, out, err, env.fn());
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hcnas_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) { return data::read_file(p.string()); }

std::string mnist_dir() {
  const char* root = std::getenv("HCNAS_TEST_DATA");
  return std::string(root ? root : "tests/data") + "/mnist";
}

// Small, fast synthetic run settings.
std::vector<std::string> tiny_sets() {
  return {"--set", "synthetic_dim=8", "--set", "synthetic_train=200", "--set", "synthetic_test=50",
          "--set", "synthetic_classes=4", "--set", "fc_width=32", "--set", "n_neigh=2",
          "--set", "n_nm=2", "--set", "epoch_neigh=1", "--set", "epoch_final=1", "--set", "batch_size=32"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("config text round trip") {
  RunConfig c;
  c.search.n_steps = 7;
  c.search.lambda_start = 0.123456789012345;
  c.search.init_mode = morph::InitMode::ZeroOne;
  c.search.select_by = search::SelectBy::Loss;
  c.search.rng_seed = 18446744073709551615ull;
  c.dataset.kind = "mnist";
  c.dataset.data_dir = "/data/mnist";
  c.dataset.synthetic.noise = 0.1;
  c.save_children = true;
  CHECK(parse_config(to_config_text(c)) == c);
  CHECK(parse_config(to_config_text(RunConfig{})) == RunConfig{});
  CHECK(config_keys().size() == 31);
  for (const auto& k : config_keys()) CHECK_NOTHROW(get_config_value(c, k));
}

TEST_CASE("config parsing errors") {
  CHECK(parse_config("# comment\n\n n_steps = 4  # trailing\n").search.n_steps == 4);
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_steps = 1\nn_steps = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_steps\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_steps = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("lambda_start = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("init_mode = ones\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("gradient_stopping = maybe\n"), ConfigError);
  try {
    parse_config("n_steps = 1\n\nbogus = 2\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("environment overrides") {
  Env env;
  env.vars["HCNAS_N_STEPS"] = "9";
  env.vars["HCNAS_GRADIENT_STOPPING"] = "false";
  env.vars["HCNAS_DATASET"] = "mnist";
  RunConfig c = parse_config("n_steps = 2\n");
  apply_env_overrides(c, env.fn());
  CHECK(c.search.n_steps == 9);
  CHECK(!c.search.gradient_stopping);
  CHECK(c.dataset.kind == "mnist");
  env.vars["HCNAS_MOMENTUM"] = "lots";
  CHECK_THROWS_AS(apply_env_overrides(c, env.fn()), ConfigError);
}

TEST_CASE("search writes a complete run directory") {
  const fs::path dir = fresh_dir("search");
  write(dir / "run.cfg", "n_steps = 5\nrng_seed = 3\n");
  Env env;
  env.vars["HCNAS_N_STEPS"] = "4";
  const auto r = hcnas_run(concat({"search", "--config", (dir / "run.cfg").string(), "--out", (dir / "out").string(),
                                   "--set", "n_steps=2", "--set", "save_children=true", "--quiet"},
                                  tiny_sets()),
                           env);
  INFO(r.err);
  REQUIRE(r.code == kExitOk);
  const fs::path out = dir / "out";
  CHECK(r.out.find("test_accuracy ") != std::string::npos);

  const json m = json::parse(slurp(out / kManifestFile));
  CHECK(m["config"]["n_steps"] == "2");  // --set beats environment beats file
  CHECK(m["config"]["rng_seed"] == "3");
  const RunConfig cfg = parse_config(m["config_text"].get<std::string>());
  CHECK(cfg.search.n_steps == 2);
  CHECK(cfg.dataset.synthetic.image_dim == 8);
  CHECK(parse_config(to_config_text(cfg)) == cfg);
  CHECK(m["dataset"]["digest_sha256"].get<std::string>().size() == 64);
  CHECK(m["format_versions"]["graph"] == graph::kFormatVersion);

  // The manifest's normalization statistics reproduce the dataset.
  const data::Dataset d = load_dataset(cfg.dataset);
  CHECK(m["dataset"]["normalization"]["mean"].get<std::vector<float>>() == d.mean);
  CHECK(m["dataset"]["normalization"]["stddev"].get<std::vector<float>>() == d.stddev);

  for (std::size_t s = 0; s <= 2; ++s) CHECK(fs::exists(out / checkpoint_name(s)));
  CHECK(fs::exists(out / kBestGraphFile));
  CHECK(fs::exists(out / kBestDotFile));
  CHECK(fs::exists(out / kSummaryFile));

  std::istringstream csv(slurp(out / kMetricsFile));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  REQUIRE(rows.size() == 1 + 1 + 2 * 2 + 1);
  CHECK(rows[0] == search::metrics_csv_header());

  json att;
  graph::load_graph((out / kBestGraphFile).string(), &att);
  CHECK(att.contains("test_accuracy"));
  json ck;
  graph::load_graph((out / checkpoint_name(2)).string(), &ck);
  CHECK(ck["step"] == 2);
  CHECK(ck["history"].size() == 2);

  // Replay of a logged child reproduces the saved child.
  const auto ok = hcnas_run({"replay", "--graph", (out / checkpoint_name(0)).string(), "--log",
                             (out / (child_stem(1, 0) + ".morphlog.json")).string(), "--expect",
                             (out / (child_stem(1, 0) + ".graph")).string()});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("graph-equal yes") != std::string::npos);
  const auto other = hcnas_run({"replay", "--graph", (out / checkpoint_name(0)).string(), "--log",
                                (out / (child_stem(1, 0) + ".morphlog.json")).string(), "--expect",
                                (out / checkpoint_name(0)).string()});
  CHECK(other.code == kExitRuntime);
  CHECK(other.out.find("graph-equal no") != std::string::npos);

  // Other commands on the produced graph.
  const auto ev = hcnas_run(concat({"eval", "--graph", (out / kBestGraphFile).string()}, tiny_sets()));
  CHECK(ev.code == kExitOk);
  CHECK(ev.out.find("samples 50") != std::string::npos);
  const auto ins = hcnas_run({"inspect", "--graph", (out / kBestGraphFile).string()});
  CHECK(ins.code == kExitOk);
  CHECK(ins.out.find("conv0") != std::string::npos);
  const auto dot = hcnas_run({"export-dot", "--graph", (out / kBestGraphFile).string()});
  CHECK(dot.code == kExitOk);
  CHECK(dot.out == slurp(out / kBestDotFile));

  fs::remove_all(dir);
}

TEST_CASE("mnist manifest statistics reproduce the normalized tensors") {
  const fs::path dir = fresh_dir("mnist");
  const auto r = hcnas_run({"search", "--out", (dir / "out").string(), "--quiet", "--set", "dataset=mnist", "--set",
                            "data_dir=" + mnist_dir(), "--set", "train_limit=120", "--set", "n_steps=0", "--set",
                            "epoch_neigh=0", "--set", "epoch_final=0", "--set", "fc_width=16"});
  INFO(r.err);
  REQUIRE(r.code == kExitOk);
  const json m = json::parse(slurp(dir / "out" / kManifestFile));
  const auto mean = m["dataset"]["normalization"]["mean"].get<std::vector<float>>();
  const auto sd = m["dataset"]["normalization"]["stddev"].get<std::vector<float>>();
  data::Split raw = data::load_mnist_idx(mnist_dir() + "/train-images-idx3-ubyte",
                                         mnist_dir() + "/train-labels-idx1-ubyte")
                        .head(120);
  data::normalize(raw, mean, sd);
  CHECK(raw.images == data::load_mnist_dir(mnist_dir(), 120).train.images);
  CHECK(m["dataset"]["train_size"] == 120);
  fs::remove_all(dir);
}

TEST_CASE("export-dot shows a multi-parent add") {
  const fs::path dir = fresh_dir("dot");
  Rng rng(3);
  graph::Graph g = graph::seed_graph({1, 8, 8}, 4, 16, rng);
  for (;;) {
    g = testing::random_graph(rng, 4);
    bool skip = false;
    for (auto n : g.topo_order())
      if (const auto* c = graph::spec_as<graph::CombineSpec>(g.spec(n)))
        skip = skip || (c->mode == ndt::CombineMode::Add && g.parents(n).size() >= 2);
    if (skip) break;
  }
  graph::save_graph((dir / "g.graph").string(), g);
  const auto r = hcnas_run({"export-dot", "--graph", (dir / "g.graph").string(), "--out", (dir / "g.dot").string()});
  REQUIRE(r.code == kExitOk);
  const std::string dot = slurp(dir / "g.dot");
  std::map<std::string, int> fan_in;
  const std::regex edge(R"(  (\w+) -> (\w+);)");
  for (auto it = std::sregex_iterator(dot.begin(), dot.end(), edge); it != std::sregex_iterator(); ++it) {
    ++fan_in[(*it)[2]];
  }
  int best = 0;
  for (auto& [name, n] : fan_in)
    if (name.rfind("add", 0) == 0) best = std::max(best, n);
  CHECK(best >= 2);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh_dir("codes");
  CHECK(hcnas_run({}).code == kExitConfig);
  CHECK(hcnas_run({"--help"}).code == kExitOk);
  CHECK(hcnas_run({"frobnicate"}).code == kExitConfig);
  CHECK(hcnas_run({"search"}).code == kExitConfig);  // --out missing
  CHECK(hcnas_run({"search", "--out", (dir / "a").string(), "--set", "bogus=1"}).code == kExitConfig);
  CHECK(hcnas_run({"search", "--out", (dir / "a").string(), "--set", "n_steps"}).code == kExitConfig);
  CHECK(hcnas_run({"search", "--out", (dir / "a").string(), "--config", (dir / "none.cfg").string()}).code ==
        kExitConfig);
  write(dir / "dup.cfg", "n_steps = 1\nn_steps = 2\n");
  CHECK(hcnas_run({"search", "--out", (dir / "a").string(), "--config", (dir / "dup.cfg").string()}).code ==
        kExitConfig);
  CHECK(hcnas_run({"search", "--out", (dir / "a").string(), "--set", "n_neigh=0"}).code == kExitConfig);
  Env bad_env;
  bad_env.vars["HCNAS_JOBS"] = "many";
  CHECK(hcnas_run({"search", "--out", (dir / "a").string()}, bad_env).code == kExitConfig);
  CHECK(hcnas_run({"search", "--out", (dir / "a").string(), "--set", "dataset=mnist", "--set",
                   "data_dir=" + (dir / "nothing").string()})
            .code == kExitData);

  CHECK(hcnas_run({"eval", "--graph", (dir / "missing.graph").string()}).code == kExitData);
  write(dir / "junk.graph", "HCNASG\nnot really");
  CHECK(hcnas_run({"inspect", "--graph", (dir / "junk.graph").string()}).code == kExitData);
  Rng rng(1);
  graph::save_graph((dir / "g.graph").string(), graph::seed_graph({1, 8, 8}, 4, 16, rng));
  const auto mismatch = hcnas_run({"eval", "--graph", (dir / "g.graph").string()});  // default data is 16×16
  CHECK(mismatch.code == kExitData);
  CHECK(mismatch.err.find("expects input") != std::string::npos);
  CHECK(hcnas_run({"replay", "--graph", (dir / "g.graph").string(), "--log", (dir / "none.json").string()}).code ==
        kExitData);
  write(dir / "bad.json", "{\"entries\": 3}");
  CHECK(hcnas_run({"replay", "--graph", (dir / "g.graph").string(), "--log", (dir / "bad.json").string()}).code ==
        kExitData);
  CHECK(hcnas_run({"eval", "--graph", (dir / "g.graph").string(), "--split", "val"}).code == kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("run file names") {
  CHECK(checkpoint_name(3) == "checkpoints/step_003.graph");
  CHECK(child_stem(1, 2) == "children/step_001_child_02");
}
