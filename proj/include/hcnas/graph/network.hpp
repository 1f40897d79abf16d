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

#include <vector>

#include "hcnas/graph/graph.hpp"
#include "hcnas/graph/shapes.hpp"
#include "hcnas/ndt/tape.hpp"

namespace hcnas::graph {

/// Executable view of a graph. Borrows the graph's parameters, so the graph
/// must outlive the network and must not be restructured while it is in use.
class Network {
 public:
  /// Runs shape inference first; throws ShapeInferenceError.
  explicit Network(Graph& g);

  /// Records the whole forward pass on `tape` and returns the logits.
  ndt::Var forward(ndt::Tape& tape, const ndt::Tensor& input, bool training);

  /// Eval-mode logits [N, num_classes].
  ndt::Tensor logits(const ndt::Tensor& input);
  /// Eval-mode argmax per sample (first maximum wins).
  std::vector<int> predict(const ndt::Tensor& input);

  /// Every learnable parameter in topological node order; within a node:
  /// weight, bias, then gamma, beta for conv blocks.
  std::vector<ndt::Parameter*> parameters();

  /// Copies each node's aging multiplier onto its parameters, or resets them
  /// all to 1 when `enabled` is false.
  void sync_lr_multipliers(bool enabled);

  const ShapeMap& shapes() const { return shapes_; }
  Graph& graph() { return *g_; }

 private:
  Graph* g_;
  ShapeMap shapes_;
};

}  // namespace hcnas::graph
