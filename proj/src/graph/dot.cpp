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

#include "hcnas/graph/dot.hpp"

#include <sstream>
#include <string>

namespace hcnas::graph {

namespace {

std::string label(const Graph& g, NodeId id) {
  const std::string hyper = describe_spec(g.spec(id));
  return hyper.empty() ? g.display_name(id) : g.display_name(id) + "\\n" + hyper;
}

std::string style(const NodeSpec& spec) {
  if (std::holds_alternative<ConvBlockSpec>(spec)) return "shape=ellipse, style=filled, fillcolor=red";
  if (std::holds_alternative<CombineSpec>(spec)) {
    return "shape=ellipse, style=filled, fillcolor=blue, fontcolor=white";
  }
  if (std::holds_alternative<MaxPoolSpec>(spec)) return "shape=ellipse, style=filled, fillcolor=gray";
  return "shape=box";
}

}  // namespace

std::string to_dot(const Graph& g) {
  std::ostringstream out;
  out << "digraph NASGraph {\n  rankdir=TB;\n";
  for (NodeId id : g.topo_order()) {
    out << "  " << g.display_name(id) << " [label=\"" << label(g, id) << "\", " << style(g.spec(id))
        << "];\n";
  }
  for (NodeId id : g.topo_order()) {
    for (NodeId c : g.children(id)) out << "  " << g.display_name(id) << " -> " << g.display_name(c) << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace hcnas::graph
