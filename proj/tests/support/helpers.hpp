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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "hcnas/graph/graph.hpp"
#include "hcnas/graph/init.hpp"
#include "hcnas/morph/morph.hpp"
#include "hcnas/ndt/tensor.hpp"
#include "hcnas/rng.hpp"

namespace hcnas::testing {

inline ndt::Tensor random_tensor(const ndt::Shape& shape, Rng& rng, float lo = -1.0f, float hi = 1.0f) {
  ndt::Tensor t(shape);
  for (auto& v : t.data()) v = uniform_float(rng, lo, hi);
  return t;
}

inline double max_abs_diff(const ndt::Tensor& a, const ndt::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
  return m;
}

/// Small input shapes the random generators draw from.
inline graph::ImageShape random_input_shape(Rng& rng) {
  static const graph::ImageShape kShapes[] = {{1, 8, 8}, {1, 12, 12}, {3, 10, 10}, {2, 16, 16}, {1, 28, 28}};
  return kShapes[uniform_index(rng, std::size(kShapes))];
}

/// Seed graph followed by `morphs` random morphisms. fc_width is kept small
/// so thousands of graphs stay cheap.
inline graph::Graph random_graph(Rng& rng, std::size_t morphs, morph::InitMode init = morph::InitMode::Default,
                                 std::size_t fc_width = 32) {
  const graph::ImageShape in = random_input_shape(rng);
  graph::Graph g = graph::seed_graph(in, 2 + uniform_index(rng, 9), fc_width, rng);
  if (morphs == 0) return g;
  morph::MorphOptions opts;
  opts.init = init;
  return morph::random_morph_sequence(g, morphs, rng, opts).child;
}

/// Every parameter value of a graph keyed by node, as flat copies.
struct ParamSnapshot {
  std::map<graph::NodeId, std::vector<std::vector<float>>> values;
};

inline ParamSnapshot snapshot(const graph::Graph& g) {
  ParamSnapshot s;
  for (const auto& [id, p] : g.all_params()) {
    auto& v = s.values[id];
    if (const auto* c = std::get_if<ndt::ConvParams>(&p)) {
      for (const auto* t : {&c->weight.value, &c->bias.value, &c->gamma.value, &c->beta.value, &c->running_mean,
                            &c->running_var}) {
        v.emplace_back(t->data().begin(), t->data().end());
      }
    } else {
      const auto& l = std::get<ndt::LinearParams>(p);
      for (const auto* t : {&l.weight.value, &l.bias.value}) v.emplace_back(t->data().begin(), t->data().end());
    }
  }
  return s;
}

}  // namespace hcnas::testing
