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

#include <compare>
#include <cstdint>
#include <functional>

namespace hcnas::graph {

/// Creation ordinal of a node. Never reused within a graph lineage.
struct NodeId {
  std::uint32_t value = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

}  // namespace hcnas::graph

template <>
struct std::hash<hcnas::graph::NodeId> {
  std::size_t operator()(const hcnas::graph::NodeId& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
