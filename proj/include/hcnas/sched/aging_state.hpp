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

#include <map>
#include <set>

#include "hcnas/graph/node_id.hpp"

namespace hcnas::sched {

/// Per-node learning-rate multipliers left by the most recent layer
/// addition. Nodes missing from `alpha` train at full rate; a node is in
/// `frozen` exactly when its multiplier is 0.
struct AgingState {
  std::map<graph::NodeId, double> alpha;
  std::set<graph::NodeId> frozen;

  double multiplier(graph::NodeId id) const {
    auto it = alpha.find(id);
    return it == alpha.end() ? 1.0 : it->second;
  }
  bool is_frozen(graph::NodeId id) const { return frozen.contains(id); }
  void reset() {
    alpha.clear();
    frozen.clear();
  }

  friend bool operator==(const AgingState&, const AgingState&) = default;
};

}  // namespace hcnas::sched
