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

#include "hcnas/graph/network.hpp"

#include <map>

namespace hcnas::graph {

Network::Network(Graph& g) : g_(&g), shapes_(infer_shapes(g)) {}

ndt::Var Network::forward(ndt::Tape& tape, const ndt::Tensor& input, bool training) {
  const ImageShape& in = g_->input_shape();
  if (input.rank() != 4 || input.dim(1) != in.channels || input.dim(2) != in.height ||
      input.dim(3) != in.width) {
    throw DimensionError("network expects (N," + std::to_string(in.channels) + "," +
                         std::to_string(in.height) + "," + std::to_string(in.width) + ") input, got " +
                         ndt::to_string(input.shape()));
  }
  std::map<NodeId, ndt::Var> out;
  const ndt::Var x = tape.constant(input);
  std::vector<ndt::Var> inputs;
  for (NodeId id : g_->topo_order()) {
    const auto parents = g_->parents(id);
    const ndt::Var first = parents.empty() ? x : out.at(parents[0]);
    const NodeSpec& spec = g_->spec(id);
    ndt::Var v;
    if (const auto* c = spec_as<ConvBlockSpec>(spec)) {
      v = tape.conv_block(first, g_->conv_params(id), c->padded, training);
    } else if (const auto* m = spec_as<MaxPoolSpec>(spec)) {
      v = tape.maxpool(first, m->kernel, m->stride);
    } else if (const auto* cb = spec_as<CombineSpec>(spec)) {
      inputs.clear();
      for (NodeId p : parents) inputs.push_back(out.at(p));
      v = tape.combine(inputs, cb->mode);
    } else if (std::get<LinearSpec>(spec).is_variable) {
      v = tape.relu(tape.linear(tape.flatten(first), g_->linear_params(id)));
    } else {
      v = tape.linear(first, g_->linear_params(id));
    }
    out.emplace(id, v);
  }
  return out.at(g_->output_linear());
}

ndt::Tensor Network::logits(const ndt::Tensor& input) {
  ndt::Tape tape;
  const ndt::Var y = forward(tape, input, false);
  return tape.take(y);
}

std::vector<int> Network::predict(const ndt::Tensor& input) {
  const ndt::Tensor z = logits(input);
  const std::size_t n = z.dim(0), k = z.dim(1);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = z.ptr() + i * k;
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (row[j] > row[best]) best = j;
    }
    labels[i] = static_cast<int>(best);
  }
  return labels;
}

std::vector<ndt::Parameter*> Network::parameters() {
  std::vector<ndt::Parameter*> ps;
  for (NodeId id : g_->topo_order()) {
    const NodeSpec& spec = g_->spec(id);
    if (std::holds_alternative<ConvBlockSpec>(spec)) {
      auto& p = g_->conv_params(id);
      ps.insert(ps.end(), {&p.weight, &p.bias, &p.gamma, &p.beta});
    } else if (std::holds_alternative<LinearSpec>(spec)) {
      auto& p = g_->linear_params(id);
      ps.insert(ps.end(), {&p.weight, &p.bias});
    }
  }
  return ps;
}

void Network::sync_lr_multipliers(bool enabled) {
  const auto& aging = g_->aging();
  for (NodeId id : g_->topo_order()) {
    const float alpha = enabled ? static_cast<float>(aging.multiplier(id)) : 1.0f;
    const NodeSpec& spec = g_->spec(id);
    if (std::holds_alternative<ConvBlockSpec>(spec)) {
      auto& p = g_->conv_params(id);
      for (auto* q : {&p.weight, &p.bias, &p.gamma, &p.beta}) q->set_multiplier(alpha);
    } else if (std::holds_alternative<LinearSpec>(spec)) {
      auto& p = g_->linear_params(id);
      for (auto* q : {&p.weight, &p.bias}) q->set_multiplier(alpha);
    }
  }
}

}  // namespace hcnas::graph
