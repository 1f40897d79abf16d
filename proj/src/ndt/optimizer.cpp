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

#include "hcnas/ndt/optimizer.hpp"

#include "hcnas/ndt/simd.hpp"

namespace hcnas::ndt {

void sgd_step(std::span<Parameter* const> params, double base_lr) {
  if (base_lr < 0.0) throw InputError("learning rate must be non-negative");
  for (Parameter* p : params) {
    const float scale = static_cast<float>(base_lr * p->lr_multiplier);
    if (scale != 0.0f && !p->frozen) {
      simd::saxpy(p->value.size(), -scale, p->grad.ptr(), p->value.ptr());
    }
    p->zero_grad();
  }
}

MomentumSgd::MomentumSgd(double momentum) : momentum_(momentum) {
  if (momentum < 0.0 || momentum >= 1.0) throw InputError("momentum must lie in [0,1)");
}

void MomentumSgd::step(std::span<Parameter* const> params, double base_lr) {
  if (base_lr < 0.0) throw InputError("learning rate must be non-negative");
  if (momentum_ == 0.0) return sgd_step(params, base_lr);
  const float mu = static_cast<float>(momentum_);
  for (Parameter* p : params) {
    if (p->frozen || p->lr_multiplier == 0.0f) {
      p->zero_grad();
      continue;
    }
    auto [it, fresh] = velocity_.try_emplace(p, p->value.shape());
    Tensor& v = it->second;
    if (v.shape() != p->value.shape()) v = Tensor(p->value.shape());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = mu * v[i] + p->grad[i];
    const float scale = static_cast<float>(base_lr * p->lr_multiplier);
    simd::saxpy(v.size(), -scale, v.ptr(), p->value.ptr());
    p->zero_grad();
  }
}

}  // namespace hcnas::ndt
