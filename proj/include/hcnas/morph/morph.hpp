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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcnas/graph/graph.hpp"
#include "hcnas/morph/kind.hpp"
#include "hcnas/rng.hpp"
#include "hcnas/sched/sched.hpp"

namespace hcnas::morph {

/// Sampled hyperparameters. Only the fields of the site's kind are used:
/// Deepen → kernel, padded; MaxPoolIns → kernel; Widen → factor.
struct MorphHyper {
  std::size_t kernel = 0;
  bool padded = false;
  std::size_t factor = 0;
  friend bool operator==(const MorphHyper&, const MorphHyper&) = default;
};

/// Skip/Merge: (a, b) = (A, B). Deepen/MaxPoolIns: edge (a, b). Widen: (x, y).
struct MorphSite {
  MorphKind kind = MorphKind::Skip;
  graph::NodeId a, b;
  MorphHyper hyper;
  friend bool operator==(const MorphSite&, const MorphSite&) = default;
};

std::string to_string(const MorphSite& s, const graph::Graph& g);

struct MorphOptions {
  InitMode init = InitMode::Default;
  sched::AgingConfig aging;
  /// Reject sites whose flatten size would exceed fc_width.
  bool strict_fc_cap = false;
};

/// Every hyperparameter combination the sampler can draw for `kind`.
std::vector<MorphHyper> hyper_choices(MorphKind kind);
/// Uniform draw over hyper_choices(kind), made field by field.
template <typename Engine>
MorphHyper sample_hyper(MorphKind kind, Engine& rng) {
  static constexpr std::size_t kDeepenKernels[] = {3, 5};
  static constexpr std::size_t kPoolKernels[] = {2, 3};
  static constexpr std::size_t kFactors[] = {2, 4};
  MorphHyper h;
  switch (kind) {
    case MorphKind::Deepen:
      h.kernel = kDeepenKernels[uniform_index(rng, 2)];
      h.padded = coin(rng);
      break;
    case MorphKind::MaxPoolIns: h.kernel = kPoolKernels[uniform_index(rng, 2)]; break;
    case MorphKind::Widen: h.factor = kFactors[uniform_index(rng, 2)]; break;
    default: break;
  }
  return h;
}

/// Sites of `kind` valid for the given hyperparameters, in a deterministic
/// order (by topological position of b, then a).
std::vector<MorphSite> enumerate_sites(const graph::Graph& g, MorphKind kind, const MorphHyper& hyper,
                                       const MorphOptions& opts = {});
/// Union over hyper_choices(kind).
std::vector<MorphSite> enumerate_sites(const graph::Graph& g, MorphKind kind, const MorphOptions& opts = {});

bool is_valid_site(const graph::Graph& g, const MorphSite& site, const MorphOptions& opts = {});

/// Nearest ConvBlock at or above `x` (fewest parent hops; ties go to the
/// later topological position, then the larger ordinal).
graph::NodeId nearest_conv_ancestor(const graph::Graph& g, graph::NodeId x);

struct MorphOutcome {
  std::optional<graph::NodeId> new_node;  // inserted layer or combine node
  bool linear_resized = false;
};

/// Applies a site. Throws MorphRejected, leaving the graph untouched, when
/// the site is not valid. Default-mode initial values are drawn from a
/// stream seeded with `init_seed`. Updates the aging state and runs the
/// linear morphism when the flatten size changes.
MorphOutcome apply_morph(graph::Graph& g, const MorphSite& site, std::uint64_t init_seed,
                         const MorphOptions& opts = {});

MorphOutcome apply_skip(graph::Graph& g, graph::NodeId a, graph::NodeId b, const MorphOptions& opts = {});
MorphOutcome apply_deepen(graph::Graph& g, graph::NodeId x, graph::NodeId y, std::size_t kernel, bool padded,
                          Rng& rng, const MorphOptions& opts = {});
MorphOutcome apply_widen(graph::Graph& g, graph::NodeId x, graph::NodeId y, std::size_t factor, Rng& rng,
                         const MorphOptions& opts = {});
MorphOutcome apply_merge(graph::Graph& g, graph::NodeId a, graph::NodeId b, Rng& rng,
                         const MorphOptions& opts = {});
MorphOutcome apply_maxpool(graph::Graph& g, graph::NodeId x, graph::NodeId y, std::size_t kernel, Rng& rng,
                           const MorphOptions& opts = {});

/// Resizes the variable linear layer's input to the current flatten size.
/// Keeps the leading min(F_old, F_new) weight rows; new rows are 0
/// (ZeroOne) or Glorot (Default). Returns false when nothing changed.
bool morph_linear(graph::Graph& g, InitMode init, Rng& rng);

struct MorphLogEntry {
  MorphSite site;
  std::uint64_t init_seed = 0;
  std::uint64_t draws = 0;  // engine outputs consumed choosing this entry
  bool linear_resized = false;
  friend bool operator==(const MorphLogEntry&, const MorphLogEntry&) = default;
};

struct MorphLog {
  InitMode init = InitMode::Default;
  std::vector<MorphLogEntry> entries;
  bool exhausted = false;  // stopped early: no kind had a site
  friend bool operator==(const MorphLog&, const MorphLog&) = default;
};

/// Log with node references by ordinal.
nlohmann::json to_json(const MorphLog& log);
MorphLog morph_log_from_json(const nlohmann::json& j);
/// "skip+deepen+linear" style summary of applied kinds.
std::string kinds_summary(const MorphLog& log);

struct MorphResult {
  graph::Graph child;
  MorphLog log;
};

/// Clones `parent` and applies up to n_nm random morphisms. Each draw picks
/// a kind uniformly from those not yet found infeasible in this draw, then
/// its hyperparameters, then a site uniformly.
MorphResult random_morph_sequence(const graph::Graph& parent, std::size_t n_nm, Rng& rng,
                                  const MorphOptions& opts = {});

/// Re-applies a log to a clone of `parent`.
graph::Graph replay(const graph::Graph& parent, const MorphLog& log, const MorphOptions& opts = {});

}  // namespace hcnas::morph
