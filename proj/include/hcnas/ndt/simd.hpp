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

// Data-parallel inner loops. Every kernel has a scalar reference in
// gemm_scalar.cpp and, where it pays off, an AVX2+FMA variant compiled in
// its own translation unit. The variant is chosen once at startup from
// CPUID; HCNAS_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <string_view>

namespace hcnas::ndt::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// True when the CPU can run the given variant.
bool supported(Isa isa);

/// The variant the dispatching entry points currently use.
Isa active_isa();

/// Overrides dispatch (tests). Throws InputError if `isa` is unsupported.
void set_active_isa(Isa isa);

enum class Trans { No, Yes };

/// Row-major C[M×N] = alpha·op(A)·op(B) + beta·C, where op(A) is M×K and
/// op(B) is K×N. lda/ldb/ldc are row strides of the stored matrices.
/// beta == 0 overwrites C without reading it.
struct GemmArgs {
  Trans trans_a = Trans::No;
  Trans trans_b = Trans::No;
  std::size_t m = 0, n = 0, k = 0;
  float alpha = 1.0f;
  const float* a = nullptr;
  std::size_t lda = 0;
  const float* b = nullptr;
  std::size_t ldb = 0;
  float beta = 0.0f;
  float* c = nullptr;
  std::size_t ldc = 0;
};

void sgemm(const GemmArgs& args);
void sgemm_scalar(const GemmArgs& args);
void sgemm_avx2(const GemmArgs& args);

/// y[i] += alpha * x[i]
void saxpy(std::size_t n, float alpha, const float* x, float* y);
void saxpy_scalar(std::size_t n, float alpha, const float* x, float* y);
void saxpy_avx2(std::size_t n, float alpha, const float* x, float* y);

/// Double-precision GEMM; reference loops only (gradient-check path).
void dgemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha,
           const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta,
           double* c, std::size_t ldc);

}  // namespace hcnas::ndt::simd
