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

#include <string>

#include "hcnas/graph/graph.hpp"

namespace hcnas::graph {

/// Graphviz digraph: one statement per node (conv blocks filled red, combine
/// nodes blue) and one per edge, in adjacency-list order.
std::string to_dot(const Graph& g);

}  // namespace hcnas::graph
