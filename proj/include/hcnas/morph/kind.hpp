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

#include <array>
#include <optional>
#include <string_view>

namespace hcnas::morph {

enum class MorphKind { Skip, Deepen, Widen, Merge, MaxPoolIns, LinearMorph };

/// The operators a random morph step samples from. LinearMorph is never
/// sampled; it follows automatically whenever the flatten size changes.
inline constexpr std::array<MorphKind, 5> kSampledKinds = {
    MorphKind::Skip, MorphKind::Deepen, MorphKind::Widen, MorphKind::Merge, MorphKind::MaxPoolIns};

/// Deepen is the only layer-addition operator for aging purposes.
inline constexpr bool is_layer_addition(MorphKind k) { return k == MorphKind::Deepen; }

inline constexpr std::string_view kind_name(MorphKind k) {
  switch (k) {
    case MorphKind::Skip: return "skip";
    case MorphKind::Deepen: return "deepen";
    case MorphKind::Widen: return "widen";
    case MorphKind::Merge: return "merge";
    case MorphKind::MaxPoolIns: return "maxpool";
    case MorphKind::LinearMorph: return "linear";
  }
  return "?";
}

inline std::optional<MorphKind> parse_kind(std::string_view s) {
  for (auto k : {MorphKind::Skip, MorphKind::Deepen, MorphKind::Widen, MorphKind::Merge,
                 MorphKind::MaxPoolIns, MorphKind::LinearMorph}) {
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

enum class InitMode { Default, ZeroOne };

inline constexpr std::string_view init_mode_name(InitMode m) {
  return m == InitMode::Default ? "default" : "zero_one";
}

inline std::optional<InitMode> parse_init_mode(std::string_view s) {
  if (s == "default" || s == "glorot" || s == "xavier") return InitMode::Default;
  if (s == "zero_one" || s == "zeroone" || s == "0/1") return InitMode::ZeroOne;
  return std::nullopt;
}

}  // namespace hcnas::morph
