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

#include "hcnas/sched/sched.hpp"

#include <cmath>
#include <deque>
#include <numbers>

#include "hcnas/errors.hpp"

namespace hcnas::sched {

double sgdr_lr(std::size_t t, const SgdrSchedule& s) {
  if (s.total_steps == 0) throw InputError("SGDR cycle needs at least one step");
  if (!(s.lambda_start >= s.lambda_end) || !(s.lambda_end >= 0.0)) {
    throw InputError("SGDR needs lambda_start >= lambda_end >= 0");
  }
  if (t > s.total_steps) {
    throw InputError("SGDR step " + std::to_string(t) + " beyond cycle length " + std::to_string(s.total_steps));
  }
  if (t == 0) return s.lambda_start;
  if (t == s.total_steps) return s.lambda_end;
  const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(s.total_steps);
  return s.lambda_end + 0.5 * (s.lambda_start - s.lambda_end) * (1.0 + std::cos(phase));
}

double effective_lr(std::size_t t, const SgdrSchedule& s, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("node multiplier must lie in [0,1]");
  return sgdr_lr(t, s) * alpha;
}

double aging_multiplier(std::size_t d, const AgingConfig& cfg) {
  if (d > cfg.cutoff) return 0.0;
  const double x = static_cast<double>(d);
  const double scale = cfg.numerator / (std::sqrt(2.0 * std::numbers::pi) * cfg.spread);
  return scale * std::exp(-(x * x) / (2.0 * cfg.spread * cfg.spread));
}

std::map<graph::NodeId, std::size_t> node_distances(const graph::Topology& topo, graph::NodeId origin) {
  if (!topo.contains(origin)) throw InputError("distance origin is not in the graph");
  std::map<graph::NodeId, std::size_t> dist{{origin, 0}};
  std::deque<graph::NodeId> queue{origin};
  while (!queue.empty()) {
    const graph::NodeId n = queue.front();
    queue.pop_front();
    const std::size_t next = dist[n] + 1;
    auto visit = [&](graph::NodeId m) {
      if (dist.emplace(m, next).second) queue.push_back(m);
    };
    for (graph::NodeId p : topo.parents(n)) visit(p);
    for (graph::NodeId c : topo.children(n)) visit(c);
  }
  return dist;
}

void on_morphism(AgingState& state, morph::MorphKind kind, const graph::Graph& g,
                 std::optional<graph::NodeId> new_node, const AgingConfig& cfg) {
  if (!morph::is_layer_addition(kind)) {
    if (new_node) throw InputError("only layer additions carry a new node");
    state.reset();
    return;
  }
  if (!new_node) throw InputError("layer addition needs its new node");
  const auto dist = node_distances(g.topology(), *new_node);
  AgingState next;
  for (graph::NodeId id : g.topo_order()) {
    if (!graph::has_params(g.spec(id))) continue;
    auto it = dist.find(id);
    const double a = it == dist.end() ? 0.0 : aging_multiplier(it->second, cfg);
    next.alpha[id] = a;
    if (a == 0.0) next.frozen.insert(id);
  }
  state = std::move(next);
}

}  // namespace hcnas::sched
