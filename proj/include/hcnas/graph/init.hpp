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

#include <cmath>
#include <span>

#include "hcnas/ndt/tensor.hpp"
#include "hcnas/rng.hpp"

namespace hcnas::graph {

/// U(−b, b) with b = sqrt(6 / (fan_in + fan_out)).
inline void glorot_uniform(std::span<float> out, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const float bound = static_cast<float>(std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
  for (auto& v : out) v = uniform_float(rng, -bound, bound);
}

/// Glorot kernel, zero bias, identity batch norm.
inline ndt::ConvParams glorot_conv(std::size_t in_ch, std::size_t out_ch, std::size_t k, Rng& rng) {
  auto p = ndt::ConvParams::zeros(in_ch, out_ch, k);
  glorot_uniform(p.weight.value.data(), in_ch * k * k, out_ch * k * k, rng);
  return p;
}

inline ndt::LinearParams glorot_linear(std::size_t in, std::size_t out, Rng& rng) {
  auto p = ndt::LinearParams::zeros(in, out);
  glorot_uniform(p.weight.value.data(), in, out, rng);
  return p;
}

}  // namespace hcnas::graph
