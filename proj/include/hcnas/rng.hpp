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

// Random draws with a fixed, library-independent mapping from engine output
// to values, so a seed reproduces the same search on every toolchain.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace hcnas {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent stream seed from a root seed and a path of stream labels.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(root);
  for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ull));
  return h;
}

/// Uniform integer in [0, n). n must be > 0.
template <typename Engine>
std::size_t uniform_index(Engine& rng, std::size_t n) {
  const unsigned __int128 wide = static_cast<unsigned __int128>(static_cast<std::uint64_t>(rng())) * n;
  return static_cast<std::size_t>(wide >> 64);
}

template <typename Engine>
bool coin(Engine& rng) {
  return (static_cast<std::uint64_t>(rng()) >> 63) != 0;
}

/// Uniform double in [0, 1).
template <typename Engine>
double uniform01(Engine& rng) {
  return static_cast<double>(static_cast<std::uint64_t>(rng()) >> 11) * 0x1.0p-53;
}

template <typename Engine>
float uniform_float(Engine& rng, float lo, float hi) {
  return lo + static_cast<float>(uniform01(rng) * (static_cast<double>(hi) - lo));
}

/// Standard normal via Box-Muller.
template <typename Engine>
double standard_normal(Engine& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Wraps an engine and counts how many values were drawn from it.
template <typename Engine>
class CountingEngine {
 public:
  using result_type = typename Engine::result_type;
  explicit CountingEngine(Engine& inner) : inner_(inner) {}
  result_type operator()() {
    ++count_;
    return inner_();
  }
  static constexpr result_type min() { return Engine::min(); }
  static constexpr result_type max() { return Engine::max(); }
  std::uint64_t count() const { return count_; }

 private:
  Engine& inner_;
  std::uint64_t count_ = 0;
};

}  // namespace hcnas
