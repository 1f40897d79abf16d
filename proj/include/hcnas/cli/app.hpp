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

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace hcnas::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitRuntime = 4 };

using GetEnv = std::function<const char*(const char*)>;

/// Runs `hcnas <args...>` (args excludes the program name). Never throws;
/// failures are reported on `err` and mapped to an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const GetEnv& getenv_fn);

/// Fixed file names inside a `search --out` directory.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kBestGraphFile = "best.graph";
inline constexpr const char* kBestDotFile = "best.dot";
inline constexpr const char* kCheckpointDir = "checkpoints";
inline constexpr const char* kChildrenDir = "children";
inline constexpr int kManifestVersion = 1;

/// "checkpoints/step_003.graph" style names, relative to the run directory.
std::string checkpoint_name(std::size_t step);
/// "children/step_001_child_02" (add ".morphlog.json" or ".graph").
std::string child_stem(std::size_t step, std::size_t child);

}  // namespace hcnas::cli
