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

#include <cstddef>
#include <map>
#include <optional>

#include "hcnas/graph/graph.hpp"
#include "hcnas/morph/kind.hpp"
#include "hcnas/sched/aging_state.hpp"

namespace hcnas::sched {

/// One cosine annealing cycle over T update steps.
struct SgdrSchedule {
  double lambda_start = 0.1;
  double lambda_end = 0.0;
  std::size_t total_steps = 1;
};

/// λ_end + ½(λ_start − λ_end)(1 + cos(π t / T)). Throws InputError when
/// t > T or the schedule itself is invalid.
double sgdr_lr(std::size_t t, const SgdrSchedule& s);

/// sgdr_lr(t, s) · alpha.
double effective_lr(std::size_t t, const SgdrSchedule& s, double alpha);

/// Shape of the gradient-stopping curve.
struct AgingConfig {
  double numerator = 6.0;
  double spread = 2.4;
  std::size_t cutoff = 6;
};

/// (numerator / (√(2π)·spread)) · exp(−d² / (2·spread²)) for d ≤ cutoff,
/// otherwise 0.
double aging_multiplier(std::size_t d, const AgingConfig& cfg = {});

/// Hop counts from `origin` over the graph with edge directions ignored.
/// Nodes unreachable from origin are absent.
std::map<graph::NodeId, std::size_t> node_distances(const graph::Topology& topo, graph::NodeId origin);

/// Updates the aging state after a morphism. Deepen (with its new node)
/// replaces the state with distance-based multipliers for every
/// parameterized node; any other kind clears it.
void on_morphism(AgingState& state, morph::MorphKind kind, const graph::Graph& g,
                 std::optional<graph::NodeId> new_node, const AgingConfig& cfg = {});

}  // namespace hcnas::sched
