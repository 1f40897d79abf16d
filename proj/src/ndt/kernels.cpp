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

#include "hcnas/ndt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace hcnas::ndt {

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

std::size_t pooled_extent(std::size_t in, std::size_t k, std::size_t pad, std::size_t stride) {
  if (stride == 0) throw InputError("stride must be >= 1");
  if (in + 2 * pad < k) {
    throw DegenerateShapeError("window " + std::to_string(k) + " exceeds padded extent " +
                               std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - k) / stride + 1;
}

ConvGeometry conv_geometry(const Shape& input, std::size_t out_ch, std::size_t kernel, bool padded,
                           std::size_t stride) {
  if (input.size() != 4) throw DimensionError("convolution expects N,C,H,W input, got " + to_string(input));
  ConvGeometry g;
  g.batch = input[0];
  g.in_ch = input[1];
  g.in_h = input[2];
  g.in_w = input[3];
  g.out_ch = out_ch;
  g.kernel = kernel;
  g.pad = padded ? (kernel - 1) / 2 : 0;
  g.stride = stride;
  g.out_h = pooled_extent(g.in_h, kernel, g.pad, stride);
  g.out_w = pooled_extent(g.in_w, kernel, g.pad, stride);
  return g;
}

PoolGeometry pool_geometry(const Shape& input, std::size_t kernel, std::size_t stride) {
  if (input.size() != 4) throw DimensionError("max pool expects N,C,H,W input, got " + to_string(input));
  PoolGeometry g;
  g.batch = input[0];
  g.channels = input[1];
  g.in_h = input[2];
  g.in_w = input[3];
  g.kernel = kernel;
  g.stride = stride;
  g.out_h = pooled_extent(g.in_h, kernel, 0, stride);
  g.out_w = pooled_extent(g.in_w, kernel, 0, stride);
  return g;
}

template <>
void gemm<float>(simd::Trans ta, simd::Trans tb, std::size_t m, std::size_t n, std::size_t k,
                 float alpha, const float* a, std::size_t lda, const float* b, std::size_t ldb,
                 float beta, float* c, std::size_t ldc) {
  simd::sgemm({ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc});
}

template <>
void gemm<double>(simd::Trans ta, simd::Trans tb, std::size_t m, std::size_t n, std::size_t k,
                  double alpha, const double* a, std::size_t lda, const double* b,
                  std::size_t ldb, double beta, double* c, std::size_t ldc) {
  simd::dgemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

namespace {

using simd::Trans;

template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
  const std::size_t plane = g.out_plane();
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    const T* xc = x + c * g.in_plane();
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        T* row = col + ((c * g.kernel + ki) * g.kernel + kj) * plane;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          T* out = row + oh * g.out_w;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h)) {
            std::fill(out, out + g.out_w, T{0});
            continue;
          }
          const T* xrow = xc + static_cast<std::size_t>(ih) * g.in_w;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            out[ow] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w))
                          ? T{0}
                          : xrow[static_cast<std::size_t>(iw)];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const T* col, T* dx) {
  const std::size_t plane = g.out_plane();
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    T* dxc = dx + c * g.in_plane();
    for (std::size_t ki = 0; ki < g.kernel; ++ki) {
      for (std::size_t kj = 0; kj < g.kernel; ++kj) {
        const T* row = col + ((c * g.kernel + ki) * g.kernel + kj) * plane;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * g.stride + ki) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
          T* dxrow = dxc + static_cast<std::size_t>(ih) * g.in_w;
          const T* in = row + oh * g.out_w;
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * g.stride + kj) -
                                      static_cast<std::ptrdiff_t>(g.pad);
            if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(g.in_w)) {
              dxrow[static_cast<std::size_t>(iw)] += in[ow];
            }
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* w, const T* b, T* y) {
  const std::size_t plane = g.out_plane();
  std::vector<T> col(g.patch() * plane);
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(g, x + n * g.in_ch * g.in_plane(), col.data());
    T* yn = y + n * g.out_ch * plane;
    for (std::size_t k = 0; k < g.out_ch; ++k) std::fill(yn + k * plane, yn + (k + 1) * plane, b[k]);
    gemm<T>(Trans::No, Trans::No, g.out_ch, plane, g.patch(), T{1}, w, g.patch(), col.data(),
            plane, T{1}, yn, plane);
  }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, const T* x, const T* w, const T* dy, T* dx, T* dw,
                     T* db) {
  const std::size_t plane = g.out_plane();
  std::vector<T> col(g.patch() * plane);
  for (std::size_t n = 0; n < g.batch; ++n) {
    const T* dyn = dy + n * g.out_ch * plane;
    for (std::size_t k = 0; k < g.out_ch; ++k) {
      T s{0};
      for (std::size_t p = 0; p < plane; ++p) s += dyn[k * plane + p];
      db[k] += s;
    }
    im2col(g, x + n * g.in_ch * g.in_plane(), col.data());
    gemm<T>(Trans::No, Trans::Yes, g.out_ch, g.patch(), plane, T{1}, dyn, plane, col.data(),
            plane, T{1}, dw, g.patch());
    if (dx != nullptr) {
      gemm<T>(Trans::Yes, Trans::No, g.patch(), plane, g.out_ch, T{1}, w, g.patch(), dyn, plane,
              T{0}, col.data(), plane);
      T* dxn = dx + n * g.in_ch * g.in_plane();
      std::fill(dxn, dxn + g.in_ch * g.in_plane(), T{0});
      col2im_add(g, col.data(), dxn);
    }
  }
}

template <typename T>
void batchnorm_train_forward(std::size_t n, std::size_t c, std::size_t plane, const T* x,
                             const T* gamma, const T* beta, T* y, T* xhat, T* invstd,
                             T* running_mean, T* running_var) {
  const std::size_t count = n * plane;
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const T* xp = x + (i * c + ch) * plane;
      for (std::size_t p = 0; p < plane; ++p) sum += xp[p];
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const T* xp = x + (i * c + ch) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const double d = xp[p] - mean;
        sq += d * d;
      }
    }
    const double var = sq / static_cast<double>(count);
    const double inv = 1.0 / std::sqrt(var + kBatchNormEps);
    invstd[ch] = static_cast<T>(inv);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const T xh = static_cast<T>((x[off + p] - mean) * inv);
        xhat[off + p] = xh;
        y[off + p] = gamma[ch] * xh + beta[ch];
      }
    }
    const double unbiased = count > 1 ? var * static_cast<double>(count) / static_cast<double>(count - 1) : var;
    running_mean[ch] = static_cast<T>((1.0 - kBatchNormMomentum) * running_mean[ch] + kBatchNormMomentum * mean);
    running_var[ch] = static_cast<T>((1.0 - kBatchNormMomentum) * running_var[ch] + kBatchNormMomentum * unbiased);
  }
}

template <typename T>
void batchnorm_eval_forward(std::size_t n, std::size_t c, std::size_t plane, const T* x,
                            const T* gamma, const T* beta, const T* running_mean,
                            const T* running_var, T* y, T* xhat, T* invstd) {
  for (std::size_t ch = 0; ch < c; ++ch) {
    const T inv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var[ch]) + kBatchNormEps));
    invstd[ch] = inv;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const T xh = (x[off + p] - running_mean[ch]) * inv;
        xhat[off + p] = xh;
        y[off + p] = gamma[ch] * xh + beta[ch];
      }
    }
  }
}

template <typename T>
void batchnorm_backward(std::size_t n, std::size_t c, std::size_t plane, const T* dy,
                        const T* xhat, const T* gamma, const T* invstd, bool batch_stats, T* dx,
                        T* dgamma, T* dbeta) {
  const double count = static_cast<double>(n * plane);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        sum_dy += dy[off + p];
        sum_dy_xhat += static_cast<double>(dy[off + p]) * xhat[off + p];
      }
    }
    dgamma[ch] += static_cast<T>(sum_dy_xhat);
    dbeta[ch] += static_cast<T>(sum_dy);
    if (dx == nullptr) continue;
    const double scale = static_cast<double>(gamma[ch]) * invstd[ch];
    const double mean_dy = batch_stats ? sum_dy / count : 0.0;
    const double mean_dy_xhat = batch_stats ? sum_dy_xhat / count : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t off = (i * c + ch) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        dx[off + p] = static_cast<T>(scale * (dy[off + p] - mean_dy - xhat[off + p] * mean_dy_xhat));
      }
    }
  }
}

template <typename T>
void maxpool_forward(const PoolGeometry& g, const T* x, T* y, std::uint32_t* argmax) {
  std::size_t out = 0;
  for (std::size_t nc = 0; nc < g.batch * g.channels; ++nc) {
    const std::size_t base = nc * g.in_h * g.in_w;
    for (std::size_t oh = 0; oh < g.out_h; ++oh) {
      for (std::size_t ow = 0; ow < g.out_w; ++ow, ++out) {
        std::size_t best = base + (oh * g.stride) * g.in_w + ow * g.stride;
        for (std::size_t ki = 0; ki < g.kernel; ++ki) {
          for (std::size_t kj = 0; kj < g.kernel; ++kj) {
            const std::size_t idx = base + (oh * g.stride + ki) * g.in_w + ow * g.stride + kj;
            if (x[idx] > x[best]) best = idx;
          }
        }
        y[out] = x[best];
        argmax[out] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <typename T>
void maxpool_backward(const PoolGeometry& g, const T* dy, const std::uint32_t* argmax, T* dx) {
  std::fill(dx, dx + g.batch * g.channels * g.in_h * g.in_w, T{0});
  const std::size_t outs = g.batch * g.channels * g.out_h * g.out_w;
  for (std::size_t i = 0; i < outs; ++i) dx[argmax[i]] += dy[i];
}

template <typename T>
void linear_forward(std::size_t n, std::size_t f, std::size_t o, const T* x, const T* w,
                    const T* b, T* y) {
  for (std::size_t i = 0; i < n; ++i) std::copy(b, b + o, y + i * o);
  gemm<T>(Trans::No, Trans::No, n, o, f, T{1}, x, f, w, o, T{1}, y, o);
}

template <typename T>
void linear_backward(std::size_t n, std::size_t f, std::size_t o, const T* x, const T* w,
                     const T* dy, T* dx, T* dw, T* db) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < o; ++j) db[j] += dy[i * o + j];
  }
  gemm<T>(Trans::Yes, Trans::No, f, o, n, T{1}, x, f, dy, o, T{1}, dw, o);
  if (dx != nullptr) gemm<T>(Trans::No, Trans::Yes, n, f, o, T{1}, dy, o, w, o, T{0}, dx, f);
}

template <typename T>
T softmax_cross_entropy(std::size_t n, std::size_t k, const T* logits,
                        std::span<const int> labels, T* probs) {
  if (labels.size() != n) {
    throw DimensionError("label count " + std::to_string(labels.size()) + " != batch " + std::to_string(n));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw InputError("label " + std::to_string(label) + " outside [0," + std::to_string(k) + ")");
    }
    const T* row = logits + i * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j]) - mx);
    const double logz = std::log(z) + mx;
    for (std::size_t j = 0; j < k; ++j) probs[i * k + j] = static_cast<T>(std::exp(row[j] - logz));
    total += logz - row[label];
  }
  return static_cast<T>(total / static_cast<double>(n));
}

#define HCNAS_INSTANTIATE(T)                                                                     \
  template void conv2d_forward<T>(const ConvGeometry&, const T*, const T*, const T*, T*);        \
  template void conv2d_backward<T>(const ConvGeometry&, const T*, const T*, const T*, T*, T*,    \
                                   T*);                                                          \
  template void batchnorm_train_forward<T>(std::size_t, std::size_t, std::size_t, const T*,      \
                                           const T*, const T*, T*, T*, T*, T*, T*);              \
  template void batchnorm_eval_forward<T>(std::size_t, std::size_t, std::size_t, const T*,       \
                                          const T*, const T*, const T*, const T*, T*, T*, T*);   \
  template void batchnorm_backward<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, \
                                      const T*, const T*, bool, T*, T*, T*);                     \
  template void maxpool_forward<T>(const PoolGeometry&, const T*, T*, std::uint32_t*);           \
  template void maxpool_backward<T>(const PoolGeometry&, const T*, const std::uint32_t*, T*);    \
  template void linear_forward<T>(std::size_t, std::size_t, std::size_t, const T*, const T*,     \
                                  const T*, T*);                                                 \
  template void linear_backward<T>(std::size_t, std::size_t, std::size_t, const T*, const T*,    \
                                   const T*, T*, T*, T*);                                        \
  template T softmax_cross_entropy<T>(std::size_t, std::size_t, const T*, std::span<const int>,  \
                                      T*);

HCNAS_INSTANTIATE(float)
HCNAS_INSTANTIATE(double)

#undef HCNAS_INSTANTIATE

}  // namespace hcnas::ndt
