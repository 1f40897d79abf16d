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

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hcnas/data/dataset.hpp"
#include "hcnas/graph/graph.hpp"
#include "hcnas/morph/morph.hpp"
#include "hcnas/rng.hpp"

namespace hcnas::search {

enum class SelectBy { Accuracy, Loss };

struct SearchConfig {
  std::size_t n_steps = 10;
  std::size_t n_nm = 5;
  std::size_t n_neigh = 8;
  std::size_t epoch_neigh = 16;
  std::size_t epoch_final = 64;
  double lambda_start = 0.1;
  double lambda_end = 0.0;
  morph::InitMode init_mode = morph::InitMode::Default;
  bool gradient_stopping = true;
  std::size_t batch_size = 64;
  double momentum = 0.9;
  double val_fraction = 0.1;
  std::uint64_t rng_seed = 0;
  std::size_t fc_width = 1024;
  SelectBy select_by = SelectBy::Accuracy;
  bool strict_fc_cap = false;
  double aging_spread = 2.4;
  std::size_t aging_cutoff = 6;
  std::size_t jobs = 1;  // concurrent neighbor trainings

  /// Throws ConfigError naming the first bad field.
  void validate() const;
  morph::MorphOptions morph_options() const;
  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

struct Candidate {
  explicit Candidate(graph::Graph g) : graph(std::move(g)) {}

  graph::Graph graph;
  double val_accuracy = 0.0;
  double val_loss = 0.0;
  double train_seconds = 0.0;
  std::size_t epochs_trained = 0;
  morph::MorphLog morph_log;
};

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
};

/// Eval-mode accuracy and mean cross-entropy over `data`.
EvalResult evaluate(graph::Graph& g, const data::Split& data, std::size_t batch_size = 256);

/// Fraction of `predicted` equal to `labels`.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);

/// Momentum SGD for `epochs` passes with one SGDR cycle over the whole
/// session, then re-scores on `val`. `shuffle_seed` drives minibatch order.
void train_candidate(Candidate& c, const data::Split& train, const data::Split& val, std::size_t epochs,
                     const SearchConfig& cfg, std::uint64_t shuffle_seed);

/// Deterministic train/val partition of a split.
struct TrainVal {
  data::Split train;
  data::Split val;
};
TrainVal split_train_val(const data::Split& s, double val_fraction, std::uint64_t seed);

struct CandidateRecord {
  std::size_t step = 0;          // 0 = seed, n_steps + 1 = final training
  std::size_t child_index = 0;   // 0 for seed/final rows
  std::size_t epochs = 0;
  double val_accuracy = 0.0;
  double val_loss = 0.0;
  double wall_seconds = 0.0;
  std::size_t node_count = 0;
  std::size_t parameter_count = 0;
  std::string morph_kinds;
  bool valid = true;
  std::string error;
};

struct StepRecord {
  std::size_t step = 0;
  std::vector<double> child_scores;  // validation accuracy of each valid child
  double best_accuracy = 0.0;        // incumbent after the step
  int selected_child = -1;           // -1: incumbent kept
};

struct SearchResult {
  Candidate best;
  double seed_accuracy = 0.0;
  std::vector<StepRecord> history;
  std::vector<CandidateRecord> records;
  double total_seconds = 0.0;
};

/// Observer hooks; all optional. All but on_child_morphed are called on the
/// orchestrating thread.
struct SearchHooks {
  std::function<void(const CandidateRecord&)> on_candidate;
  /// The trained seed, before the first step.
  std::function<void(const Candidate& seed)> on_seed;
  /// A freshly morphed child of `parent`, before training. Runs on the
  /// worker thread that owns the child, so it may be called concurrently.
  std::function<void(std::size_t step, std::size_t child, const Candidate& parent, const Candidate& child_state)>
      on_child_morphed;
  std::function<void(const StepRecord&, const Candidate& incumbent)> on_step;
  std::function<void(const std::string&)> log;
};

/// Seed → epoch_neigh training → n_steps rounds of n_neigh morphed children
/// → epoch_final training of the winner.
SearchResult hill_climb(const SearchConfig& cfg, const data::Dataset& data, const SearchHooks& hooks = {});

inline constexpr int kMetricsCsvVersion = 1;
/// Header row of the metrics CSV.
std::string metrics_csv_header();
std::string metrics_csv_row(const CandidateRecord& r);

}  // namespace hcnas::search
