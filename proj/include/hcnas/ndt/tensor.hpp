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
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hcnas/errors.hpp"

namespace hcnas::ndt {

/// Extents, outermost first. Images are N,C,H,W; flattened activations N,F.
using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& s);

/// Dense row-major tensor owning its storage.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
    check_extents();
    data_.assign(shape_size(shape_), fill);
  }

  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents();
    if (data_.size() != shape_size(shape_)) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + to_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T* ptr() noexcept { return data_.data(); }
  const T* ptr() const noexcept { return data_.data(); }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  /// Same storage viewed under another shape of equal size.
  BasicTensor reshaped(Shape s) const& { return BasicTensor(std::move(s), data_); }
  BasicTensor reshaped(Shape s) && { return BasicTensor(std::move(s), std::move(data_)); }

  template <typename U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  void check_extents() const {
    for (auto e : shape_) {
      if (e == 0) throw DimensionError("tensor extents must be >= 1, got " + to_string(shape_));
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

/// A learnable tensor with its gradient and per-node learning-rate scale.
/// `frozen` implies `lr_multiplier == 0`.
template <typename T>
struct BasicParameter {
  BasicTensor<T> value;
  BasicTensor<T> grad;
  T lr_multiplier = T{1};
  bool frozen = false;

  BasicParameter() = default;
  explicit BasicParameter(BasicTensor<T> v) : value(std::move(v)), grad(value.shape()) {}

  void set_multiplier(T alpha) {
    lr_multiplier = alpha;
    frozen = (alpha == T{0});
  }
  void zero_grad() { grad.fill(T{0}); }
};

using Parameter = BasicParameter<float>;

/// Conv(k×k) + BatchNorm + ReLU block state.
template <typename T>
struct BasicConvParams {
  BasicParameter<T> weight;  // [out, in, k, k]
  BasicParameter<T> bias;    // [out]
  BasicParameter<T> gamma;   // [out]
  BasicParameter<T> beta;    // [out]
  BasicTensor<T> running_mean;
  BasicTensor<T> running_var;

  std::size_t out_channels() const { return weight.value.dim(0); }
  std::size_t in_channels() const { return weight.value.dim(1); }
  std::size_t kernel() const { return weight.value.dim(2); }

  /// Zero weights and bias, identity batch-norm.
  static BasicConvParams zeros(std::size_t in_ch, std::size_t out_ch, std::size_t k) {
    BasicConvParams p;
    p.weight = BasicParameter<T>(BasicTensor<T>({out_ch, in_ch, k, k}));
    p.bias = BasicParameter<T>(BasicTensor<T>({out_ch}));
    p.gamma = BasicParameter<T>(BasicTensor<T>({out_ch}, T{1}));
    p.beta = BasicParameter<T>(BasicTensor<T>({out_ch}));
    p.running_mean = BasicTensor<T>({out_ch});
    p.running_var = BasicTensor<T>({out_ch}, T{1});
    return p;
  }
};

/// Fully connected layer: y = x·W + b with W stored [in, out].
template <typename T>
struct BasicLinearParams {
  BasicParameter<T> weight;  // [in, out]
  BasicParameter<T> bias;    // [out]

  std::size_t in_dim() const { return weight.value.dim(0); }
  std::size_t out_dim() const { return weight.value.dim(1); }

  static BasicLinearParams zeros(std::size_t in, std::size_t out) {
    BasicLinearParams p;
    p.weight = BasicParameter<T>(BasicTensor<T>({in, out}));
    p.bias = BasicParameter<T>(BasicTensor<T>({out}));
    return p;
  }
};

using ConvParams = BasicConvParams<float>;
using LinearParams = BasicLinearParams<float>;

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

}  // namespace hcnas::ndt
