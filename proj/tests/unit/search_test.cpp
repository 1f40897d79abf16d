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


#include <algorithm>
#include <optional>
#include <set>

#include "doctest.h"
#include "hcnas/data/dataset.hpp"
#include "hcnas/graph/init.hpp"
#include "hcnas/graph/network.hpp"
#include "hcnas/search/search.hpp"
#include "support/helpers.hpp"
#include "support/runs.hpp"

using namespace hcnas;
using namespace hcnas::graph;
using namespace hcnas::search;

namespace {

data::Dataset small_synthetic(std::size_t train = 300, std::size_t classes = 4, std::uint64_t seed = 1) {
  data::SyntheticSpec s;
  s.classes = classes;
  s.train_size = train;
  s.test_size = 100;
  s.image_dim = 8;
  s.seed = seed;
  return data::synthetic_dataset(s);
}

SearchConfig tiny_config() {
  SearchConfig c;
  c.n_steps = 2;
  c.n_neigh = 3;
  c.n_nm = 2;
  c.epoch_neigh = 1;
  c.epoch_final = 1;
  c.fc_width = 32;
  c.batch_size = 32;
  c.rng_seed = 5;
  return c;
}

int argmax_row(const ndt::Tensor& logits, std::size_t row) {
  const std::size_t k = logits.dim(1);
  const auto r = logits.data().subspan(row * k, k);
  return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
}

}  // namespace

TEST_CASE("accuracy helper") {
  CHECK(accuracy({1, 2, 3, 4}, {1, 2, 0, 0}) == 0.5);
  CHECK(accuracy({7}, {7}) == 1.0);
  CHECK_THROWS_AS(accuracy({}, {}), InputError);
  CHECK_THROWS_AS(accuracy({1}, {1, 2}), InputError);
}

TEST_CASE("evaluate against an argmax oracle") {
  const auto d = small_synthetic();
  Rng rng(2);
  for (int i = 0; i < 5; ++i) {
    Graph g = seed_graph(d.image_shape(), d.num_classes, 32, rng);
    Network net(g);
    const auto logits = net.logits(d.test.images);
    std::vector<int> pred;
    for (std::size_t r = 0; r < d.test.size(); ++r) pred.push_back(argmax_row(logits, r));
    const auto ev = evaluate(g, d.test, 7);  // odd batch size exercises the tail
    CHECK(ev.accuracy == doctest::Approx(accuracy(pred, d.test.labels)));
    CHECK(ev.loss == doctest::Approx(ndt::cross_entropy_loss(logits, d.test.labels)).epsilon(1e-5));
  }
}

TEST_CASE("constant prediction scores the class frequency") {
  const auto d = small_synthetic();
  Rng rng(3);
  Graph g = seed_graph(d.image_shape(), d.num_classes, 32, rng);
  auto& out = g.linear_params(g.output_linear());
  std::fill(out.weight.value.data().begin(), out.weight.value.data().end(), 0.0f);
  std::fill(out.bias.value.data().begin(), out.bias.value.data().end(), 0.0f);
  out.bias.value.data()[2] = 1.0f;
  const auto ev = evaluate(g, d.test);
  const double freq = std::count(d.test.labels.begin(), d.test.labels.end(), 2) / double(d.test.size());
  CHECK(ev.accuracy == doctest::Approx(freq));
  CHECK(freq == doctest::Approx(1.0 / d.num_classes));  // balanced classes
}

TEST_CASE("training overfits a tiny set") {
  const auto d = small_synthetic(16, 4);
  Rng rng(4);
  Candidate c(seed_graph(d.image_shape(), d.num_classes, 32, rng));
  SearchConfig cfg = tiny_config();
  cfg.batch_size = 8;
  cfg.lambda_start = 0.05;
  train_candidate(c, d.train, d.train, 200, cfg, 9);
  CHECK(c.val_accuracy == 1.0);
  CHECK(c.epochs_trained == 200);
}

TEST_CASE("gradient stopping freezes parameters") {
  const auto d = small_synthetic(64);
  Rng rng(5);
  Graph g = seed_graph(d.image_shape(), d.num_classes, 32, rng);
  const NodeId conv = g.source();
  const NodeId fc = g.variable_linear();
  g.aging().alpha[conv] = 0.0;
  g.aging().frozen.insert(conv);
  g.aging().alpha[fc] = 0.5;

  SearchConfig cfg = tiny_config();
  Candidate frozen(g);
  train_candidate(frozen, d.train, d.train, 2, cfg, 1);
  const auto& before = g.conv_params(conv);
  const auto& after = frozen.graph.conv_params(conv);
  CHECK(after.weight.value == before.weight.value);
  CHECK(after.bias.value == before.bias.value);
  CHECK(after.gamma.value == before.gamma.value);
  CHECK(after.beta.value == before.beta.value);
  CHECK(!(frozen.graph.linear_params(fc).weight.value == g.linear_params(fc).weight.value));

  cfg.gradient_stopping = false;
  Candidate open(g);
  train_candidate(open, d.train, d.train, 2, cfg, 1);
  CHECK(!(open.graph.conv_params(conv).weight.value == before.weight.value));
}

TEST_CASE("zero epochs only scores") {
  const auto d = small_synthetic(64);
  Rng rng(6);
  Graph g = seed_graph(d.image_shape(), d.num_classes, 32, rng);
  Candidate c(g);
  train_candidate(c, d.train, d.test, 0, tiny_config(), 1);
  CHECK(c.graph == g);
  Graph copy = g;
  CHECK(c.val_accuracy == evaluate(copy, d.test).accuracy);
}

TEST_CASE("train/val split") {
  const auto d = small_synthetic(4400, 10);
  const auto tv = split_train_val(d.train, 1.0 / 11.0, 3);
  CHECK(tv.train.size() == 4000);
  CHECK(tv.val.size() == 400);
  const auto again = split_train_val(d.train, 1.0 / 11.0, 3);
  CHECK(again.val.labels == tv.val.labels);
  CHECK(again.val.images == tv.val.images);
  CHECK_THROWS_AS(split_train_val(d.train.head(5), 0.01, 1), InputError);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    SearchConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  bad([](SearchConfig& c) { c.n_nm = 0; });
  bad([](SearchConfig& c) { c.n_neigh = 0; });
  bad([](SearchConfig& c) { c.batch_size = 0; });
  bad([](SearchConfig& c) { c.jobs = 0; });
  bad([](SearchConfig& c) { c.lambda_end = 0.2; });
  bad([](SearchConfig& c) { c.momentum = 1.0; });
  bad([](SearchConfig& c) { c.val_fraction = 0.0; });
  bad([](SearchConfig& c) { c.val_fraction = 1.0; });
  CHECK_NOTHROW(SearchConfig{}.validate());
}

TEST_CASE("metrics CSV rows") {
  CHECK(metrics_csv_header() ==
        "step,child,epochs,val_accuracy,val_loss,wall_seconds,node_count,parameter_count,morph_kinds,valid,error");
  CandidateRecord r;
  r.step = 2;
  r.child_index = 1;
  r.epochs = 4;
  r.val_accuracy = 0.5;
  r.val_loss = 1.25;
  r.wall_seconds = 3.14159;
  r.node_count = 5;
  r.parameter_count = 1000;
  r.morph_kinds = "skip+deepen";
  r.valid = false;
  r.error = "bad, very\nbad";
  CHECK(metrics_csv_row(r) == "2,1,4,0.5,1.25,3.142,5,1000,skip+deepen,0,bad; very;bad");
  CHECK(testing::mask_wall_seconds(metrics_csv_row(r)) == "2,1,4,0.5,1.25,,5,1000,skip+deepen,0,bad; very;bad");
}

TEST_CASE("hill climb with no steps trains the seed") {
  const auto d = small_synthetic();
  SearchConfig cfg = tiny_config();
  cfg.n_steps = 0;
  const auto run = testing::captured_run(cfg, d);
  CHECK(run.result.history.empty());
  REQUIRE(run.csv.size() == 2);
  CHECK(run.csv[0].rfind("0,0,1,", 0) == 0);
  CHECK(run.csv[1].rfind("1,0,1,", 0) == 0);
  CHECK(run.result.best.graph.topology().node_count() == 3);
  CHECK(run.result.best.epochs_trained == 2);
}

TEST_CASE("hill climb contract on a tiny problem") {
  const auto d = small_synthetic();
  SearchConfig cfg = tiny_config();

  std::size_t morphed = 0, parent_mismatch = 0;
  std::optional<Graph> seed_graph_seen;
  SearchHooks hooks;
  hooks.on_seed = [&](const Candidate& s) { seed_graph_seen = s.graph; };
  hooks.on_child_morphed = [&](std::size_t step, std::size_t, const Candidate& parent, const Candidate& child) {
    ++morphed;
    if (step == 1 && !(parent.graph == *seed_graph_seen)) ++parent_mismatch;
    if (child.morph_log.entries.empty() && !child.morph_log.exhausted) ++parent_mismatch;
  };
  std::vector<double> best;
  hooks.on_step = [&](const StepRecord& s, const Candidate& inc) {
    best.push_back(s.best_accuracy);
    CHECK(inc.val_accuracy == s.best_accuracy);
  };
  const auto r = hill_climb(cfg, d, hooks);
  CHECK(morphed == cfg.n_steps * cfg.n_neigh);
  CHECK(parent_mismatch == 0);
  REQUIRE(r.history.size() == cfg.n_steps);
  CHECK(r.records.size() == 1 + cfg.n_steps * cfg.n_neigh + 1);
  double prev = r.seed_accuracy;
  for (const auto& h : r.history) {
    CHECK(h.best_accuracy >= prev);
    CHECK(h.child_scores.size() <= cfg.n_neigh);
    if (h.selected_child >= 0) CHECK(h.best_accuracy > prev);
    prev = h.best_accuracy;
  }
  CHECK(best.size() == cfg.n_steps);
}

TEST_CASE("hill climb is deterministic and parallel runs match serial ones") {
  const auto d = small_synthetic();
  SearchConfig cfg = tiny_config();
  const auto a = testing::captured_run(cfg, d);
  const auto b = testing::captured_run(cfg, d);
  CHECK(a.csv == b.csv);
  CHECK(a.result.best.graph == b.result.best.graph);
  cfg.jobs = 2;
  const auto p = testing::captured_run(cfg, d);
  CHECK(p.csv == a.csv);
  CHECK(p.result.best.graph == a.result.best.graph);
  cfg.jobs = 1;
  cfg.rng_seed = 6;
  const auto other = testing::captured_run(cfg, d);
  CHECK(other.csv != a.csv);
}
