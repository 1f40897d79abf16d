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

#include <atomic>
#include <cstdlib>
#include <string>

#include "hcnas/errors.hpp"
#include "hcnas/ndt/simd.hpp"

namespace hcnas::ndt::simd {
namespace {

bool cpu_has_avx2() {
#if defined(HCNAS_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("HCNAS_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!supported(isa)) throw InputError("SIMD variant not supported on this CPU: " + std::string(isa_name(isa)));
  active().store(isa, std::memory_order_relaxed);
}

void sgemm(const GemmArgs& args) {
#ifdef HCNAS_HAVE_AVX2_TU
  if (active_isa() == Isa::Avx2) return sgemm_avx2(args);
#endif
  sgemm_scalar(args);
}

void saxpy(std::size_t n, float alpha, const float* x, float* y) {
#ifdef HCNAS_HAVE_AVX2_TU
  if (active_isa() == Isa::Avx2) return saxpy_avx2(n, alpha, x, y);
#endif
  saxpy_scalar(n, alpha, x, y);
}

}  // namespace hcnas::ndt::simd
