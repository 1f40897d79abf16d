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

#include <span>
#include <unordered_map>

#include "hcnas/ndt/tensor.hpp"

namespace hcnas::ndt {

/// value -= base_lr · lr_multiplier · grad, then grad = 0.
/// Parameters with a zero multiplier are left bit-identical.
void sgd_step(std::span<Parameter* const> params, double base_lr);

/// SGD with heavy-ball momentum: v = μ·v + g; value -= lr·α·v.
/// Velocity buffers are keyed by parameter address and live for one
/// training session.
class MomentumSgd {
 public:
  explicit MomentumSgd(double momentum);

  void step(std::span<Parameter* const> params, double base_lr);
  double momentum() const { return momentum_; }

 private:
  double momentum_;
  std::unordered_map<const Parameter*, Tensor> velocity_;
};

}  // namespace hcnas::ndt
