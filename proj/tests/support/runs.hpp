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


// Search runs with their metrics captured, for tests that compare runs.

#pragma once

#include <string>
#include <vector>

#include "hcnas/search/search.hpp"

namespace hcnas::testing {

struct CapturedRun {
  search::SearchResult result;
  std::vector<std::string> csv;  // metrics rows with wall_seconds blanked
};

/// Blanks the wall_seconds column, the only field allowed to differ
/// between two runs with the same seed.
inline std::string mask_wall_seconds(const std::string& row) {
  std::string out;
  std::size_t col = 0;
  for (char ch : row) {
    if (ch == ',') ++col;
    if (col == 5 && ch != ',') continue;
    out += ch;
  }
  return out;
}

inline CapturedRun captured_run(const search::SearchConfig& cfg, const data::Dataset& d) {
  std::vector<std::string> rows;
  search::SearchHooks hooks;
  hooks.on_candidate = [&](const search::CandidateRecord& r) { rows.push_back(mask_wall_seconds(search::metrics_csv_row(r))); };
  auto result = search::hill_climb(cfg, d, hooks);
  return {std::move(result), std::move(rows)};
}

}  // namespace hcnas::testing
