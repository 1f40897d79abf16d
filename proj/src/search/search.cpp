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

#include "hcnas/search/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "hcnas/errors.hpp"
#include "hcnas/graph/network.hpp"
#include "hcnas/ndt/optimizer.hpp"
#include "hcnas/sched/sched.hpp"

namespace hcnas::search {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Stream labels for derive_seed.
enum Stream : std::uint64_t { kSplit = 1, kSeedGraph, kSeedTrain, kMorph, kChildTrain, kFinalTrain };

}  // namespace

void SearchConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(n_nm >= 1, "n_NM must be >= 1");
  need(n_neigh >= 1, "n_neigh must be >= 1");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(fc_width >= 1, "fc_width must be >= 1");
  need(jobs >= 1, "jobs must be >= 1");
  need(lambda_end >= 0.0 && lambda_start >= lambda_end, "need lambda_start >= lambda_end >= 0");
  need(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0,1)");
  need(val_fraction > 0.0 && val_fraction < 1.0, "val_fraction must lie in (0,1)");
  need(aging_spread > 0.0, "aging_spread must be positive");
}

morph::MorphOptions SearchConfig::morph_options() const {
  morph::MorphOptions o;
  o.init = init_mode;
  o.strict_fc_cap = strict_fc_cap;
  o.aging.spread = aging_spread;
  o.aging.cutoff = aging_cutoff;
  return o;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
  if (predicted.size() != labels.size() || labels.empty()) throw InputError("accuracy needs equal, non-empty lists");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

EvalResult evaluate(graph::Graph& g, const data::Split& data, std::size_t batch_size) {
  if (data.size() == 0) throw InputError("cannot evaluate on an empty split");
  graph::Network net(g);
  std::vector<int> predicted;
  predicted.reserve(data.size());
  double loss_sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = start + i;
    const data::Split batch = data.gather(idx);
    const ndt::Tensor z = net.logits(batch.images);
    loss_sum += static_cast<double>(ndt::cross_entropy_loss(z, batch.labels)) * static_cast<double>(n);
    const std::size_t k = z.dim(1);
    for (std::size_t i = 0; i < n; ++i) {
      const float* row = z.ptr() + i * k;
      predicted.push_back(static_cast<int>(std::max_element(row, row + k) - row));
    }
  }
  return {accuracy(predicted, data.labels), loss_sum / static_cast<double>(data.size())};
}

void train_candidate(Candidate& c, const data::Split& train, const data::Split& val, std::size_t epochs,
                     const SearchConfig& cfg, std::uint64_t shuffle_seed) {
  const auto t0 = Clock::now();
  graph::Network net(c.graph);
  if (epochs > 0) {
    const std::size_t n = train.size();
    if (n == 0) throw InputError("empty training split");
    const std::size_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const sched::SgdrSchedule schedule{cfg.lambda_start, cfg.lambda_end, epochs * per_epoch};
    net.sync_lr_multipliers(cfg.gradient_stopping);
    const auto params = net.parameters();
    ndt::MomentumSgd opt(cfg.momentum);
    Rng rng(shuffle_seed);
    std::vector<std::size_t> order(n);
    std::vector<std::size_t> idx;
    ndt::Tape tape;
    std::size_t t = 0;
    for (std::size_t e = 0; e < epochs; ++e) {
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
      for (std::size_t start = 0; start < n; start += cfg.batch_size, ++t) {
        const std::size_t b = std::min(cfg.batch_size, n - start);
        idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(start + b));
        const data::Split batch = train.gather(idx);
        tape.clear();
        const ndt::Var logits = net.forward(tape, batch.images, true);
        const ndt::Var loss = tape.cross_entropy(logits, batch.labels);
        tape.backward(loss);
        opt.step(params, sched::sgdr_lr(t, schedule));
      }
    }
    c.epochs_trained += epochs;
  }
  const EvalResult r = evaluate(c.graph, val);
  c.val_accuracy = r.accuracy;
  c.val_loss = r.loss;
  c.train_seconds = seconds_since(t0);
}

TrainVal split_train_val(const data::Split& s, double val_fraction, std::uint64_t seed) {
  const std::size_t n = s.size();
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n) throw InputError("validation split would be empty or take every sample");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const std::span<const std::size_t> all(order);
  return {s.gather(all.subspan(n_val)), s.gather(all.first(n_val))};
}

namespace {

CandidateRecord record_of(const Candidate& c, std::size_t step, std::size_t child, std::size_t epochs) {
  CandidateRecord r;
  r.step = step;
  r.child_index = child;
  r.epochs = epochs;
  r.val_accuracy = c.val_accuracy;
  r.val_loss = c.val_loss;
  r.wall_seconds = c.train_seconds;
  r.node_count = c.graph.topology().node_count();
  r.parameter_count = c.graph.parameter_count();
  r.morph_kinds = morph::kinds_summary(c.morph_log);
  return r;
}

bool beats(const Candidate& child, const Candidate& incumbent, SelectBy by) {
  return by == SelectBy::Accuracy ? child.val_accuracy > incumbent.val_accuracy
                                  : child.val_loss < incumbent.val_loss;
}

}  // namespace

SearchResult hill_climb(const SearchConfig& cfg, const data::Dataset& data, const SearchHooks& hooks) {
  cfg.validate();
  const auto t0 = Clock::now();
  auto say = [&](const std::string& s) {
    if (hooks.log) hooks.log(s);
  };
  const std::uint64_t seed = cfg.rng_seed;
  const TrainVal tv = split_train_val(data.train, cfg.val_fraction, derive_seed(seed, {kSplit}));
  const morph::MorphOptions mopts = cfg.morph_options();

  Rng seed_rng(derive_seed(seed, {kSeedGraph}));
  Candidate incumbent{graph::seed_graph(data.image_shape(), data.num_classes, cfg.fc_width, seed_rng)};
  train_candidate(incumbent, tv.train, tv.val, cfg.epoch_neigh, cfg, derive_seed(seed, {kSeedTrain}));

  SearchResult result{incumbent, incumbent.val_accuracy, {}, {}, 0.0};
  auto emit = [&](CandidateRecord r) {
    if (hooks.on_candidate) hooks.on_candidate(r);
    result.records.push_back(std::move(r));
  };
  emit(record_of(incumbent, 0, 0, cfg.epoch_neigh));
  say("seed: val_accuracy=" + std::to_string(incumbent.val_accuracy));
  if (hooks.on_seed) hooks.on_seed(incumbent);

  for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
    // Only the best child so far is kept alive; losers are dropped as soon
    // as they are scored. Ties go to the lower child index.
    std::vector<CandidateRecord> records(cfg.n_neigh);
    std::vector<std::optional<double>> scores(cfg.n_neigh);
    std::optional<Candidate> best_child;
    std::size_t best_index = 0;
    std::mutex best_mu;
    auto run_child = [&](std::size_t i) {
      CandidateRecord& rec = records[i];
      try {
        Rng rng(derive_seed(seed, {kMorph, step, i}));
        auto mr = morph::random_morph_sequence(incumbent.graph, cfg.n_nm, rng, mopts);
        Candidate child{std::move(mr.child)};
        child.morph_log = std::move(mr.log);
        child.epochs_trained = incumbent.epochs_trained;
        if (hooks.on_child_morphed) hooks.on_child_morphed(step, i, incumbent, child);
        train_candidate(child, tv.train, tv.val, cfg.epoch_neigh, cfg, derive_seed(seed, {kChildTrain, step, i}));
        rec = record_of(child, step, i, cfg.epoch_neigh);
        scores[i] = child.val_accuracy;
        std::lock_guard lock(best_mu);
        if (!best_child || beats(child, *best_child, cfg.select_by) ||
            (!beats(*best_child, child, cfg.select_by) && i < best_index)) {
          best_child = std::move(child);
          best_index = i;
        }
      } catch (const Error& e) {
        rec.step = step;
        rec.child_index = i;
        rec.epochs = cfg.epoch_neigh;
        rec.valid = false;
        rec.error = e.what();
      }
    };
    const std::size_t workers = std::min(cfg.jobs, cfg.n_neigh);
    incumbent.graph.topo_order();  // fill the order cache before workers share the parent
    if (workers <= 1) {
      for (std::size_t i = 0; i < cfg.n_neigh; ++i) run_child(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < cfg.n_neigh; i = next++) run_child(i);
        });
      }
      for (auto& th : pool) th.join();
    }

    StepRecord sr;
    sr.step = step;
    for (std::size_t i = 0; i < cfg.n_neigh; ++i) {
      emit(records[i]);
      if (scores[i]) {
        sr.child_scores.push_back(*scores[i]);
      } else {
        say("step " + std::to_string(step) + " child " + std::to_string(i) + " discarded: " + records[i].error);
      }
    }
    int chosen = -1;
    if (best_child && beats(*best_child, incumbent, cfg.select_by)) chosen = static_cast<int>(best_index);
    if (chosen >= 0) incumbent = std::move(*best_child);
    sr.selected_child = chosen;
    sr.best_accuracy = incumbent.val_accuracy;
    say("step " + std::to_string(step) + ": best val_accuracy=" + std::to_string(incumbent.val_accuracy) +
        (chosen >= 0 ? " (child " + std::to_string(chosen) + ")" : " (incumbent kept)"));
    if (hooks.on_step) hooks.on_step(sr, incumbent);
    result.history.push_back(std::move(sr));
  }

  train_candidate(incumbent, tv.train, tv.val, cfg.epoch_final, cfg, derive_seed(seed, {kFinalTrain}));
  emit(record_of(incumbent, cfg.n_steps + 1, 0, cfg.epoch_final));
  say("final: val_accuracy=" + std::to_string(incumbent.val_accuracy));
  result.best = std::move(incumbent);
  result.total_seconds = seconds_since(t0);
  return result;
}

std::string metrics_csv_header() {
  return "step,child,epochs,val_accuracy,val_loss,wall_seconds,node_count,parameter_count,morph_kinds,valid,error";
}

std::string metrics_csv_row(const CandidateRecord& r) {
  std::string err = r.error;
  std::replace_if(err.begin(), err.end(), [](char ch) { return ch == ',' || ch == '\n' || ch == '"'; }, ';');
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.9g,%.9g,%.3f,%zu,%zu,", r.step, r.child_index, r.epochs,
                r.val_accuracy, r.val_loss, r.wall_seconds, r.node_count, r.parameter_count);
  return buf + r.morph_kinds + "," + (r.valid ? "1" : "0") + "," + err;
}

}  // namespace hcnas::search
