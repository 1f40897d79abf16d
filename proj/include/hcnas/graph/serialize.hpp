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

// Checkpoint layout:
//
//   "HCNASG\n" <manifest byte length, decimal> "\n" <JSON manifest> <blob>
//
// The manifest holds topology, hyperparameters, aging state and byte
// offsets into the blob, which is every parameter tensor as little-endian
// float32, node by node in ascending ordinal.

#include <string>
#include <string_view>

#include "json.hpp"

#include "hcnas/graph/graph.hpp"

namespace hcnas::graph {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kGraphMagic = "HCNASG\n";

/// `attachments` is stored verbatim under the manifest key "attachments".
std::string serialize(const Graph& g, const nlohmann::json& attachments = nullptr);

/// Throws ParseError (with byte offset) on malformed input, FormatError on
/// an unknown format version. Never returns a partial graph.
Graph deserialize(std::string_view bytes, nlohmann::json* attachments = nullptr);

void save_graph(const std::string& path, const Graph& g, const nlohmann::json& attachments = nullptr);
Graph load_graph(const std::string& path, nlohmann::json* attachments = nullptr);

}  // namespace hcnas::graph
