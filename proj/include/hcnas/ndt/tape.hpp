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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "hcnas/ndt/tensor.hpp"

namespace hcnas::ndt {

enum class CombineMode { Add, Concat };

/// Handle to a value recorded on a tape.
struct Var {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  bool valid() const { return index != std::numeric_limits<std::size_t>::max(); }
};

/// Records a forward pass layer by layer and replays it in reverse to
/// produce gradients. Parameters are referenced, not owned; they must outlive
/// the tape. A tape is single-use per forward: call clear() to reuse it.
template <typename T>
class BasicTape {
 public:
  using TensorT = BasicTensor<T>;
  using ParamT = BasicParameter<T>;

  Var constant(TensorT value);

  /// ReLU(BatchNorm(Conv(x))). Training mode normalizes with batch
  /// statistics and updates the running statistics in `p`.
  Var conv_block(Var x, BasicConvParams<T>& p, bool padded, bool training);
  Var maxpool(Var x, std::size_t kernel, std::size_t stride);
  Var linear(Var x, BasicLinearParams<T>& p);
  Var relu(Var x);
  Var flatten(Var x);
  /// Add requires identical shapes; Concat stacks channels in input order.
  Var combine(std::span<const Var> inputs, CombineMode mode);
  Var cross_entropy(Var logits, std::span<const int> labels);
  /// Scalar Σ x·weights. Handy as a generic loss for gradient checks.
  Var dot(Var x, const TensorT& weights);

  const TensorT& value(Var v) const;
  /// Gradient w.r.t. a recorded value; zeros if nothing flowed into it.
  TensorT grad(Var v) const;
  TensorT take(Var v);

  /// Zeroes the grads of every parameter touched by this tape, then
  /// accumulates dRoot/dParam into them. Root must be a scalar.
  void backward(Var root);

  void clear();
  std::size_t size() const { return nodes_.size(); }

  /// Hash of every ReLU mask and max-pool argmax seen since clear().
  /// Two forwards with equal hashes lie on the same smooth piece.
  void track_decisions(bool on) { track_ = on; }
  std::uint64_t decision_hash() const { return decisions_; }

 private:
  using Backward = std::function<void(BasicTape&, const TensorT& dy)>;

  struct Node {
    TensorT value;
    TensorT grad;
    Backward backward;
  };

  Var push(TensorT value, Backward bw);
  const Node& node(Var v) const;
  TensorT& grad_slot(Var v);
  void register_param(ParamT& p) { params_.push_back(&p); }
  void mix(std::uint64_t v);

  std::vector<Node> nodes_;
  std::vector<ParamT*> params_;
  bool track_ = false;
  std::uint64_t decisions_ = 1469598103934665603ull;
};

using Tape = BasicTape<float>;

// Single-layer forward helpers on plain tensors.

template <typename T>
BasicTensor<T> conv_block_forward(const BasicTensor<T>& input, BasicConvParams<T>& params,
                                  bool padded, bool training);
template <typename T>
BasicTensor<T> maxpool_forward(const BasicTensor<T>& input, std::size_t kernel, std::size_t stride);
template <typename T>
BasicTensor<T> linear_forward(const BasicTensor<T>& input, BasicLinearParams<T>& params);
template <typename T>
BasicTensor<T> combine_forward(std::span<const BasicTensor<T>> inputs, CombineMode mode);
template <typename T>
T cross_entropy_loss(const BasicTensor<T>& logits, std::span<const int> labels);

}  // namespace hcnas::ndt
