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

// Raw layer kernels over contiguous NCHW / NF buffers. Instantiated for float
// (training) and double (gradient checking). The float path routes its
// matrix products through the SIMD dispatcher.

#include <cstddef>
#include <cstdint>
#include <span>

#include "hcnas/ndt/simd.hpp"
#include "hcnas/ndt/tensor.hpp"

namespace hcnas::ndt {

/// floor((in + 2·pad − k)/stride) + 1, or DegenerateShapeError if that is < 1.
std::size_t pooled_extent(std::size_t in, std::size_t k, std::size_t pad, std::size_t stride);

struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t in_ch = 0, in_h = 0, in_w = 0;
  std::size_t out_ch = 0, out_h = 0, out_w = 0;
  std::size_t kernel = 0, pad = 0, stride = 1;

  std::size_t patch() const { return in_ch * kernel * kernel; }
  std::size_t out_plane() const { return out_h * out_w; }
  std::size_t in_plane() const { return in_h * in_w; }
};

/// Padded convolutions use pad = (k−1)/2.
ConvGeometry conv_geometry(const Shape& input, std::size_t out_ch, std::size_t kernel, bool padded,
                           std::size_t stride = 1);

struct PoolGeometry {
  std::size_t batch = 0, channels = 0;
  std::size_t in_h = 0, in_w = 0, out_h = 0, out_w = 0;
  std::size_t kernel = 0, stride = 0;
};

PoolGeometry pool_geometry(const Shape& input, std::size_t kernel, std::size_t stride);

template <typename T>
void gemm(simd::Trans ta, simd::Trans tb, std::size_t m, std::size_t n, std::size_t k, T alpha,
          const T* a, std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

// y = conv(x, w) + b
template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* b, T* y);

// Accumulates into dw/db; writes dx when non-null.
template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw,
                     T* db);

/// Per-channel statistics over N·H·W. Writes xhat and the per-channel
/// inverse standard deviation used for backward.
template <typename T>
void batchnorm_train_forward(std::size_t n, std::size_t c, std::size_t plane, const T* x,
                             const T* gamma, const T* beta, T* y, T* xhat, T* invstd,
                             T* running_mean, T* running_var);

template <typename T>
void batchnorm_eval_forward(std::size_t n, std::size_t c, std::size_t plane, const T* x,
                            const T* gamma, const T* beta, const T* running_mean,
                            const T* running_var, T* y, T* xhat, T* invstd);

/// `batch_stats` selects the training-mode backward (mean/var depend on x).
template <typename T>
void batchnorm_backward(std::size_t n, std::size_t c, std::size_t plane, const T* dy,
                        const T* xhat, const T* gamma, const T* invstd, bool batch_stats, T* dx,
                        T* dgamma, T* dbeta);

/// Writes the max of every window and the flat input index it came from.
/// Ties go to the first element in row-major window order.
template <typename T>
void maxpool_forward(const PoolGeometry& g, const T* x, T* y, std::uint32_t* argmax);

template <typename T>
void maxpool_backward(const PoolGeometry& g, const T* dy, const std::uint32_t* argmax, T* dx);

// y[N,O] = x[N,F]·w[F,O] + b
template <typename T>
void linear_forward(std::size_t n, std::size_t f, std::size_t o, const T* x, const T* w,
                    const T* b, T* y);

template <typename T>
void linear_backward(std::size_t n, std::size_t f, std::size_t o, const T* x, const T* w,
                     const T* dy, T* dx, T* dw, T* db);

/// Returns mean −log softmax(logits)[label]; writes softmax probabilities.
template <typename T>
T softmax_cross_entropy(std::size_t n, std::size_t k, const T* logits,
                        std::span<const int> labels, T* probs);

}  // namespace hcnas::ndt
